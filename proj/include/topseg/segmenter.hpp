#pragma once

#include <memory>
#include <string>
#include <vector>

#include "topseg/corpus.hpp"
#include "topseg/graph.hpp"
#include "topseg/json_util.hpp"
#include "topseg/losses.hpp"
#include "topseg/tensor.hpp"
#include "topseg/wordpiece.hpp"

namespace topseg {

// Token ids per sentence plus the per-sentence end-of-segment labels.
struct EncodedDoc {
  std::vector<std::vector<int>> sentence_ids;
  std::vector<int> labels;

  std::size_t size() const { return sentence_ids.size(); }

  // Gap g sits after sentence g and carries that sentence's label; the final
  // sentence closes the document and is not a candidate.
  std::vector<int> candidate_labels() const {
    return {labels.begin(), labels.end() - 1};
  }
};

// A trainable end-of-segment scorer. Implementations score the n-1 candidate
// gaps of a document, optionally inside a caller-owned graph so batches share
// parameter leaves.
class Segmenter {
 public:
  virtual ~Segmenter() = default;

  virtual const std::string& family() const = 0;
  virtual Json config_json() const = 0;
  const Vocabulary& vocab() const { return vocab_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  virtual EncodedDoc encode(const SegDocument& doc) const = 0;

  // Node with shape [n-1, 1]: probability that each candidate gap ends a
  // segment.
  virtual NodeId candidate_probs_node(Graph& g,
                                      const EncodedDoc& doc) const = 0;

  std::vector<float> candidate_probs(const EncodedDoc& doc) const {
    Graph g;
    NodeId node = candidate_probs_node(g, doc);
    const Tensor& t = g.value(node);
    std::vector<float> out(t.data.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = clamp_unit(t.data[i]);
    }
    return out;
  }

  std::vector<float> candidate_probs(const SegDocument& doc) const {
    return candidate_probs(encode(doc));
  }

 protected:
  // Emitted probabilities stay strictly inside (0,1) even when the softmax
  // saturates in float32.
  static float clamp_unit(float p) {
    return std::min(1.0f - float(kProbEps), std::max(float(kProbEps), p));
  }

  Vocabulary vocab_;
  ParamStore params_;
};

}  // namespace topseg
