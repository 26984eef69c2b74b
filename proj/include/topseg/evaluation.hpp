#pragma once

#include <functional>
#include <vector>

#include "topseg/common.hpp"
#include "topseg/corpus.hpp"
#include "topseg/segmenter.hpp"

namespace topseg {

struct EvalReport {
  std::int64_t tp = 0, fp = 0, fn = 0;

  // Zero denominators score zero.
  double precision() const {
    return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
  }
  double recall() const {
    return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
  }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
};

// p >= threshold is a predicted boundary (inclusive).
inline std::vector<int> threshold_probs(const std::vector<float>& probs,
                                        double threshold) {
  std::vector<int> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = double(probs[i]) >= threshold ? 1 : 0;
  }
  return out;
}

// Per-sentence probabilities in, candidate predictions out: the final
// sentence always ends a segment, so it is excluded and an n-sentence
// document yields n-1 predictions.
inline std::vector<int> predict_boundaries(
    const std::vector<float>& sentence_probs, double threshold) {
  require(sentence_probs.size() >= 2,
          "predict_boundaries: need >= 2 sentence probabilities, got ",
          sentence_probs.size());
  std::vector<float> candidates(sentence_probs.begin(),
                                sentence_probs.end() - 1);
  return threshold_probs(candidates, threshold);
}

inline EvalReport prf1(const std::vector<int>& predictions,
                       const std::vector<int>& gold) {
  require(predictions.size() == gold.size(), "prf1: ", predictions.size(),
          " predictions vs ", gold.size(), " gold labels");
  EvalReport r;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    require(predictions[i] == 0 || predictions[i] == 1,
            "prf1: predictions must be 0/1");
    require(gold[i] == 0 || gold[i] == 1, "prf1: gold labels must be 0/1");
    if (predictions[i] == 1 && gold[i] == 1) ++r.tp;
    else if (predictions[i] == 1) ++r.fp;
    else if (gold[i] == 1) ++r.fn;
  }
  return r;
}

// Micro average: counts pool over every candidate gap in the corpus.
inline EvalReport evaluate_corpus(
    const std::function<std::vector<float>(const SegDocument&)>& probs_fn,
    const std::vector<SegDocument>& docs, double threshold) {
  require(!docs.empty(), "evaluate_corpus: empty corpus");
  EvalReport total;
  for (const auto& d : docs) {
    require(d.size() >= 2, "evaluate_corpus: document '", d.doc_id,
            "' has fewer than 2 sentences");
    std::vector<float> probs = probs_fn(d);
    require(probs.size() == d.size() - 1, "evaluate_corpus: got ",
            probs.size(), " probabilities for ", d.size() - 1,
            " candidates in '", d.doc_id, "'");
    std::vector<int> preds = threshold_probs(probs, threshold);
    std::vector<int> gold(d.labels.begin(), d.labels.end() - 1);
    EvalReport r = prf1(preds, gold);
    total.tp += r.tp;
    total.fp += r.fp;
    total.fn += r.fn;
  }
  return total;
}

inline EvalReport evaluate_corpus(const Segmenter& model,
                                  const std::vector<SegDocument>& docs,
                                  double threshold) {
  return evaluate_corpus(
      [&](const SegDocument& d) { return model.candidate_probs(d); }, docs,
      threshold);
}

}  // namespace topseg
