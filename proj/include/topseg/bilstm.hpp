#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "topseg/segmenter.hpp"

namespace topseg {

struct HierConfig {
  int embed_dim = 64;
  int hidden_dim = 128;  // per direction
  int vocab_cap = 20000; // ceiling when building the word vocabulary

  void validate() const {
    require(embed_dim >= 1, "hierarchical: embed_dim must be >= 1");
    require(hidden_dim >= 1, "hierarchical: hidden_dim must be >= 1");
    require(vocab_cap > 4, "hierarchical: vocab_cap must exceed the specials");
  }

  static HierConfig from_json(const Json& j) {
    check_keys(j, {"family", "embed_dim", "hidden_dim", "vocab_cap"},
               "model config (hierarchical)");
    HierConfig c;
    c.embed_dim = get_or(j, "embed_dim", c.embed_dim);
    c.hidden_dim = get_or(j, "hidden_dim", c.hidden_dim);
    c.vocab_cap = get_or(j, "vocab_cap", c.vocab_cap);
    c.validate();
    return c;
  }

  Json to_json() const {
    return Json{{"family", "hierarchical"},
                {"embed_dim", embed_dim},
                {"hidden_dim", hidden_dim},
                {"vocab_cap", vocab_cap}};
  }
};

// Word embeddings -> two-layer BiLSTM over each sentence's words, max-pooled
// over time into sentence vectors -> two-layer BiLSTM over the document's
// sentence vectors -> affine + softmax per sentence.
class HierarchicalModel : public Segmenter {
 public:
  static constexpr const char* kFamily = "hierarchical";

  HierarchicalModel(HierConfig config, Vocabulary vocab, std::uint64_t seed)
      : config_(config) {
    config_.validate();
    vocab.check_specials();
    vocab_ = std::move(vocab);
    init_params(seed);
  }

  HierarchicalModel(HierConfig config, Vocabulary vocab, ParamStore params)
      : config_(config) {
    config_.validate();
    vocab.check_specials();
    vocab_ = std::move(vocab);
    params_ = std::move(params);
    check_params();
  }

  const std::string& family() const override {
    static const std::string f = kFamily;
    return f;
  }

  Json config_json() const override { return config_.to_json(); }
  const HierConfig& config() const { return config_; }

  EncodedDoc encode(const SegDocument& doc) const override {
    EncodedDoc enc;
    enc.labels = doc.labels;
    for (const auto& s : doc.sentences) {
      require(!s.word_tokens.empty(), "hierarchical: sentence without tokens in '",
              doc.doc_id, "'");
      enc.sentence_ids.push_back(word_encode(vocab_, s.word_tokens));
    }
    return enc;
  }

  // Sentence vector: max over time of the top BiLSTM layer's states, width
  // 2 * hidden_dim.
  NodeId encode_sentence_node(Graph& g, const std::vector<int>& ids) const {
    return g.reduce_max0(sentence_states_node(g, ids));
  }

  // Top-layer states [len, 2*hidden], exposed so pooling is testable.
  NodeId sentence_states_node(Graph& g, const std::vector<int>& ids) const {
    require(!ids.empty(), "encode_sentence: empty sentence");
    NodeId emb = g.gather(g.leaf("embed", params_.at("embed")), ids);
    NodeId l0 = bilstm_layer(g, emb, "sent.l0");
    return bilstm_layer(g, l0, "sent.l1");
  }

  Tensor encode_sentence(const std::vector<int>& ids) const {
    Graph g;
    return g.value(encode_sentence_node(g, ids));
  }

  Tensor sentence_states(const std::vector<int>& ids) const {
    Graph g;
    return g.value(sentence_states_node(g, ids));
  }

  // [n, 1]: end-of-segment probability for every sentence, the final one
  // included (downstream loss and evaluation drop it).
  NodeId sentence_probs_node(Graph& g, const EncodedDoc& doc) const {
    require(doc.size() >= 2, "hierarchical: document needs >= 2 sentences, has ",
            doc.size());
    std::vector<NodeId> rows;
    rows.reserve(doc.size());
    for (const auto& ids : doc.sentence_ids) {
      rows.push_back(encode_sentence_node(g, ids));
    }
    NodeId sent = g.concat(rows, 0);
    NodeId d0 = bilstm_layer(g, sent, "doc.l0");
    NodeId d1 = bilstm_layer(g, d0, "doc.l1");
    NodeId logits = g.add(g.matmul(d1, g.leaf("head.w", params_.at("head.w"))),
                          g.leaf("head.b", params_.at("head.b")));
    NodeId probs = g.softmax(logits);
    return g.slice(probs, 1, 1, 1);
  }

  NodeId candidate_probs_node(Graph& g, const EncodedDoc& doc) const override {
    NodeId all = sentence_probs_node(g, doc);
    return g.slice(all, 0, 0, int(doc.size()) - 1);
  }

  std::vector<float> sentence_probs(const EncodedDoc& doc) const {
    Graph g;
    const Tensor& t = g.value(sentence_probs_node(g, doc));
    std::vector<float> out(t.data.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = clamp_unit(t.data[i]);
    return out;
  }

  std::vector<float> sentence_probs(const SegDocument& doc) const {
    return sentence_probs(encode(doc));
  }

  static std::int64_t expected_param_count(const HierConfig& c, int vocab) {
    const std::int64_t h = c.hidden_dim;
    auto layer = [&](std::int64_t in) { return 2 * (in * 4 * h + h * 4 * h + 4 * h); };
    return std::int64_t(vocab) * c.embed_dim      // embed
           + layer(c.embed_dim) + layer(2 * h)    // sentence level
           + layer(2 * h) + layer(2 * h)          // document level
           + 2 * h * 2 + 2;                       // head
  }

 private:
  HierConfig config_;

  // One bidirectional layer: x [n, in] -> [n, 2*hidden].
  NodeId bilstm_layer(Graph& g, NodeId x, const std::string& prefix) const {
    const int n = g.value(x).rows();
    std::vector<NodeId> fw = lstm_direction(g, x, prefix + ".fw", false);
    std::vector<NodeId> bw = lstm_direction(g, x, prefix + ".bw", true);
    std::vector<NodeId> rows;
    rows.reserve(std::size_t(n));
    for (int t = 0; t < n; ++t) {
      rows.push_back(g.concat({fw[std::size_t(t)], bw[std::size_t(t)]}, 1));
    }
    return g.concat(rows, 0);
  }

  std::vector<NodeId> lstm_direction(Graph& g, NodeId x,
                                     const std::string& prefix,
                                     bool reverse) const {
    const int n = g.value(x).rows();
    const int h = config_.hidden_dim;
    NodeId wx = g.leaf(prefix + ".wx", params_.at(prefix + ".wx"));
    NodeId wh = g.leaf(prefix + ".wh", params_.at(prefix + ".wh"));
    NodeId b = g.leaf(prefix + ".b", params_.at(prefix + ".b"));
    NodeId xw = g.add(g.matmul(x, wx), b);  // [n, 4h]
    NodeId hprev = g.constant(Tensor::zeros({1, h}));
    NodeId cprev = g.constant(Tensor::zeros({1, h}));
    std::vector<NodeId> states(static_cast<std::size_t>(n));
    for (int step = 0; step < n; ++step) {
      const int t = reverse ? n - 1 - step : step;
      NodeId z = g.add(g.slice(xw, 0, t, 1), g.matmul(hprev, wh));
      NodeId gi = g.sigmoid(g.slice(z, 1, 0, h));
      NodeId gf = g.sigmoid(g.slice(z, 1, h, h));
      NodeId gg = g.tanh(g.slice(z, 1, 2 * h, h));
      NodeId go = g.sigmoid(g.slice(z, 1, 3 * h, h));
      cprev = g.add(g.mul(gf, cprev), g.mul(gi, gg));
      hprev = g.mul(go, g.tanh(cprev));
      states[std::size_t(t)] = hprev;
    }
    return states;
  }

  void init_params(std::uint64_t seed) {
    const int h = config_.hidden_dim;
    auto weight = [&](const std::string& name, int in, int out) {
      params_[name] = seeded_init(
          {in, out}, InitScheme::uniform(1.0f / std::sqrt(float(in))),
          derive_seed(seed, name));
    };
    params_["embed"] = seeded_init(
        {vocab_.size(), config_.embed_dim},
        InitScheme::uniform(1.0f / std::sqrt(float(config_.embed_dim))),
        derive_seed(seed, "embed"));
    auto lstm = [&](const std::string& prefix, int in) {
      for (const char* dir : {".fw", ".bw"}) {
        weight(prefix + dir + ".wx", in, 4 * h);
        weight(prefix + dir + ".wh", h, 4 * h);
        params_[prefix + dir + ".b"] = Tensor::zeros({4 * h});
      }
    };
    lstm("sent.l0", config_.embed_dim);
    lstm("sent.l1", 2 * h);
    lstm("doc.l0", 2 * h);
    lstm("doc.l1", 2 * h);
    weight("head.w", 2 * h, 2);
    params_["head.b"] = Tensor::zeros({2});
  }

  void check_params() const {
    require(std::int64_t(param_count(params_)) ==
                expected_param_count(config_, vocab_.size()),
            "hierarchical: parameter table does not match config");
    require(params_.count("embed") &&
                params_.at("embed").shape ==
                    std::vector<int>({vocab_.size(), config_.embed_dim}),
            "hierarchical: bad embedding shape for vocabulary of ",
            vocab_.size());
  }
};

}  // namespace topseg
