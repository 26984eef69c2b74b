#pragma once

#include <memory>
#include <string>

#include "topseg/bilstm.hpp"
#include "topseg/cross_segment.hpp"
#include "topseg/segmenter.hpp"

namespace topseg {

inline std::unique_ptr<Segmenter> make_segmenter(const std::string& family,
                                                 const Json& config,
                                                 Vocabulary vocab,
                                                 std::uint64_t seed) {
  if (family == HierarchicalModel::kFamily) {
    return std::make_unique<HierarchicalModel>(HierConfig::from_json(config),
                                               std::move(vocab), seed);
  }
  if (family == CrossSegmentModel::kFamily) {
    return std::make_unique<CrossSegmentModel>(CrossConfig::from_json(config),
                                               std::move(vocab), seed);
  }
  throw Error(cat("unknown model family \"", family,
                  "\" (expected \"hierarchical\" or \"cross_segment\")"));
}

inline std::unique_ptr<Segmenter> make_segmenter(const std::string& family,
                                                 const Json& config,
                                                 Vocabulary vocab,
                                                 ParamStore params) {
  if (family == HierarchicalModel::kFamily) {
    return std::make_unique<HierarchicalModel>(HierConfig::from_json(config),
                                               std::move(vocab),
                                               std::move(params));
  }
  if (family == CrossSegmentModel::kFamily) {
    return std::make_unique<CrossSegmentModel>(CrossConfig::from_json(config),
                                               std::move(vocab),
                                               std::move(params));
  }
  throw Error(cat("unknown model family \"", family,
                  "\" (expected \"hierarchical\" or \"cross_segment\")"));
}

// Builds the family's vocabulary from training documents: whole words for the
// hierarchical model, a trained word-piece inventory for the cross-segment
// model.
inline Vocabulary build_vocab_for(const std::string& family, const Json& config,
                                  const std::vector<SegDocument>& train_docs) {
  require(!train_docs.empty(), "build_vocab: no training documents");
  if (family == HierarchicalModel::kFamily) {
    return build_word_vocab(train_docs, HierConfig::from_json(config).vocab_cap);
  }
  if (family == CrossSegmentModel::kFamily) {
    std::vector<std::string> sentences;
    for (const auto& d : train_docs) {
      for (const auto& s : d.sentences) sentences.push_back(s.text);
    }
    return train_wordpiece(sentences,
                           CrossConfig::from_json(config).vocab_size);
  }
  throw Error(cat("unknown model family \"", family, "\""));
}

}  // namespace topseg
