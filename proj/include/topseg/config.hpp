#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "topseg/corpus.hpp"
#include "topseg/json_util.hpp"
#include "topseg/losses.hpp"
#include "topseg/training.hpp"

namespace topseg {

enum class CorpusFormat { kChat, kWiki, kDocs };

inline CorpusFormat corpus_format_from(const std::string& s) {
  if (s == "chat") return CorpusFormat::kChat;
  if (s == "wiki") return CorpusFormat::kWiki;
  if (s == "docs") return CorpusFormat::kDocs;
  throw Error(cat("unknown corpus format \"", s,
                  "\" (expected \"chat\", \"wiki\" or \"docs\")"));
}

struct CorpusSpec {
  CorpusFormat format = CorpusFormat::kChat;
  std::string path;
  double train_ratio = 0.8, dev_ratio = 0.1, test_ratio = 0.1;
  int segments = 0;  // 0: inherit the run-level value (chat format only)

  static CorpusSpec from_json(const Json& j, const std::string& where) {
    check_keys(j, {"format", "path", "split", "segments"}, where);
    CorpusSpec c;
    c.format = corpus_format_from(get_req<std::string>(j, "format", where));
    if (c.format == CorpusFormat::kChat) {
      c.train_ratio = 0.6;
      c.dev_ratio = 0.2;
      c.test_ratio = 0.2;
    }
    c.path = get_req<std::string>(j, "path", where);
    require(std::filesystem::exists(c.path), where, ": no such path: ", c.path);
    if (j.contains("split")) {
      auto v = j["split"].get<std::vector<double>>();
      require(v.size() == 3, where, ": \"split\" must be [train,dev,test]");
      c.train_ratio = v[0];
      c.dev_ratio = v[1];
      c.test_ratio = v[2];
    }
    c.segments = get_or(j, "segments", 0);
    return c;
  }
};

inline LossSpec loss_from_json(const Json& j, const std::string& where) {
  const auto kind = get_req<std::string>(j, "kind", where);
  LossSpec spec;
  if (kind == "ce") {
    check_keys(j, {"kind", "name"}, where);
    spec = LossSpec::ce();
  } else if (kind == "weighted_ce") {
    check_keys(j, {"kind", "name", "w0", "w1"}, where);
    spec = LossSpec::weighted_ce(get_req<double>(j, "w0", where),
                                 get_req<double>(j, "w1", where));
  } else if (kind == "focal") {
    check_keys(j, {"kind", "name", "alpha", "gamma"}, where);
    spec = LossSpec::focal(get_req<double>(j, "alpha", where),
                           get_req<double>(j, "gamma", where));
  } else {
    throw Error(cat(where, ": unknown loss kind \"", kind, "\""));
  }
  spec.validate();
  return spec;
}

struct RunConfig {
  std::uint64_t seed = 1;
  int segments = 5;
  double threshold = 0.5;
  CorpusSpec corpus;
  Json model;  // family + architecture; null allowed when finetuning
  TrainConfig train;

  static RunConfig from_json(const Json& j) {
    check_keys(j, {"seed", "segments", "threshold", "corpus", "model", "loss",
                   "train"},
               "run config");
    RunConfig c;
    c.seed = get_or<std::uint64_t>(j, "seed", 1);
    c.segments = get_or(j, "segments", 5);
    require(c.segments >= 2, "run config: \"segments\" must be >= 2, got ",
            c.segments);
    c.threshold = get_or(j, "threshold", 0.5);
    require(c.threshold >= 0.0 && c.threshold <= 1.0,
            "run config: \"threshold\" must lie in [0,1]");
    require(j.contains("corpus"), "run config: missing \"corpus\"");
    c.corpus = CorpusSpec::from_json(j["corpus"], "run config corpus");
    if (j.contains("model") && !j["model"].is_null()) c.model = j["model"];
    if (j.contains("train")) {
      const Json& t = j["train"];
      check_keys(t, {"epochs", "batch_size", "learning_rate", "clip_norm"},
                 "run config train");
      c.train.epochs = get_or(t, "epochs", 10);
      c.train.batch_size = get_or(t, "batch_size", 8);
      c.train.learning_rate = get_or(t, "learning_rate", 0.0);
      c.train.clip_norm = get_or(t, "clip_norm", 5.0);
    }
    if (j.contains("loss")) {
      c.train.loss = loss_from_json(j["loss"], "run config loss");
    }
    c.train.threshold = c.threshold;
    c.train.seed = c.seed;
    c.train.validate();
    return c;
  }
};

inline Json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  require(in.good(), what, ": cannot open ", path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(cat(what, ": invalid JSON in ", path, ": ", e.what()));
  }
}

inline RunConfig load_run_config(const std::string& path) {
  return RunConfig::from_json(load_json_file(path, "run config"));
}

// Loads and splits a corpus. All randomness derives from `seed`, so the same
// spec and seed always produce the same splits.
inline CorpusSplits load_corpus_splits(const CorpusSpec& spec, int segments,
                                       std::uint64_t seed) {
  std::vector<SegDocument> docs = [&] {
    switch (spec.format) {
      case CorpusFormat::kChat: {
        auto convs = load_chat_corpus(spec.path);
        const int k = spec.segments > 0 ? spec.segments : segments;
        return build_documents(convs, k, derive_seed(seed, "build"));
      }
      case CorpusFormat::kWiki:
        return load_wiki_corpus(spec.path);
      case CorpusFormat::kDocs:
        return read_documents(spec.path);
    }
    throw Error("load_corpus_splits: bad format");
  }();
  return split_corpus(docs, spec.train_ratio, spec.dev_ratio, spec.test_ratio,
                      derive_seed(seed, "split"));
}

// Loads a corpus without splitting (evaluation over a whole file).
inline std::vector<SegDocument> load_corpus_docs(const CorpusSpec& spec,
                                                 int segments,
                                                 std::uint64_t seed) {
  switch (spec.format) {
    case CorpusFormat::kChat: {
      auto convs = load_chat_corpus(spec.path);
      const int k = spec.segments > 0 ? spec.segments : segments;
      return build_documents(convs, k, derive_seed(seed, "build"));
    }
    case CorpusFormat::kWiki:
      return load_wiki_corpus(spec.path);
    case CorpusFormat::kDocs:
      return read_documents(spec.path);
  }
  throw Error("load_corpus_docs: bad format");
}

}  // namespace topseg
