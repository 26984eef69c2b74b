#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "topseg/evaluation.hpp"
#include "topseg/graph.hpp"
#include "topseg/losses.hpp"
#include "topseg/optimizer.hpp"
#include "topseg/segmenter.hpp"

namespace topseg {

struct TrainConfig {
  int epochs = 10;
  int batch_size = 8;     // documents per optimizer step
  double learning_rate = 0.0;  // 0 picks the family default
  double clip_norm = 5.0;
  double threshold = 0.5;  // dev evaluation
  LossSpec loss = LossSpec::ce();
  std::uint64_t seed = 1;
  bool quiet = true;

  void validate() const {
    require(epochs >= 0, "train: epochs must be >= 0");
    require(batch_size >= 1, "train: batch_size must be >= 1");
    require(learning_rate >= 0.0, "train: learning_rate must be >= 0");
    require(clip_norm > 0.0, "train: clip_norm must be positive");
    require(threshold >= 0.0 && threshold <= 1.0,
            "train: threshold must lie in [0,1]");
    loss.validate();
  }
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  EvalReport dev;
};

inline double default_learning_rate(const std::string& family) {
  return family == "cross_segment" ? 3e-4 : 1e-3;
}

// One Adam step per batch of documents: every candidate gap in the batch
// contributes to one mean loss. Documents with fewer than 2 sentences are
// skipped with a warning; an epoch with nothing left is an error.
inline std::vector<EpochStats> train_model(
    Segmenter& model, const std::vector<SegDocument>& train_docs,
    const std::vector<SegDocument>& dev_docs, const TrainConfig& cfg) {
  cfg.validate();
  std::vector<EncodedDoc> encoded;
  encoded.reserve(train_docs.size());
  for (const auto& d : train_docs) {
    bool usable = d.size() >= 2;
    for (const auto& s : d.sentences) usable &= !s.word_tokens.empty();
    if (!usable) {
      std::cerr << "train: skipping document '" << d.doc_id
                << "': fewer than 2 usable sentences\n";
      continue;
    }
    encoded.push_back(model.encode(d));
  }
  require(!encoded.empty(), "train: no usable training documents");

  const double lr = cfg.learning_rate > 0.0 ? cfg.learning_rate
                                            : default_learning_rate(model.family());
  OptimizerState opt = OptimizerState::for_params(model.params());
  std::vector<EpochStats> history;
  history.reserve(std::size_t(cfg.epochs));

  std::vector<std::size_t> order(encoded.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, cat("epoch-", epoch)));
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::int64_t example_count = 0;
    for (std::size_t b = 0; b < order.size(); b += std::size_t(cfg.batch_size)) {
      Graph g;
      std::vector<NodeId> parts;
      std::vector<int> labels;
      for (std::size_t i = b;
           i < order.size() && i < b + std::size_t(cfg.batch_size); ++i) {
        const EncodedDoc& doc = encoded[order[i]];
        parts.push_back(model.candidate_probs_node(g, doc));
        auto cl = doc.candidate_labels();
        labels.insert(labels.end(), cl.begin(), cl.end());
      }
      NodeId probs = parts.size() == 1 ? parts[0] : g.concat(parts, 0);
      NodeId loss = g.batch_loss(probs, labels, cfg.loss);
      const double loss_value = double(g.value(loss).data[0]);
      if (!std::isfinite(loss_value)) {
        throw NumericError(cat("train: non-finite loss in epoch ", epoch));
      }
      GradMap grads = g.backward(loss);
      clip_gradients(grads, cfg.clip_norm);
      adam_step(model.params(), grads, opt, lr);
      loss_sum += loss_value * double(labels.size());
      example_count += std::int64_t(labels.size());
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / double(example_count);
    if (!dev_docs.empty()) {
      stats.dev = evaluate_corpus(model, dev_docs, cfg.threshold);
    }
    if (!cfg.quiet) {
      std::cerr << "epoch " << epoch << ": loss " << stats.train_loss
                << " dev f1 " << stats.dev.f1() << "\n";
    }
    history.push_back(stats);
  }
  return history;
}

// Continued training on new documents with the checkpoint's vocabulary;
// tokens it has never seen fall back to [UNK].
inline std::vector<EpochStats> finetune_model(
    Segmenter& model, const std::vector<SegDocument>& train_docs,
    const std::vector<SegDocument>& dev_docs, const TrainConfig& cfg) {
  return train_model(model, train_docs, dev_docs, cfg);
}

}  // namespace topseg
