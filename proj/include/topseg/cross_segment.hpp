#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "topseg/segmenter.hpp"

namespace topseg {

struct CrossConfig {
  int layers = 4;
  int model_dim = 128;
  int heads = 4;
  int ff_dim = 512;
  int max_seq = 128;
  int context_k = 62;     // word-pieces kept on each side of the gap
  int vocab_size = 2000;  // word-piece inventory budget

  void validate() const {
    require(layers >= 1, "cross_segment: layers must be >= 1");
    require(model_dim >= 1, "cross_segment: model_dim must be >= 1");
    require(heads >= 1, "cross_segment: heads must be >= 1");
    require(model_dim % heads == 0, "cross_segment: heads (", heads,
            ") must divide model_dim (", model_dim, ")");
    require(ff_dim >= 1, "cross_segment: ff_dim must be >= 1");
    require(context_k >= 1, "cross_segment: context_k must be >= 1");
    require(2 * context_k + 3 <= max_seq,
            "cross_segment: window 2*context_k+3 = ", 2 * context_k + 3,
            " exceeds max_seq ", max_seq);
    require(vocab_size > 4, "cross_segment: vocab_size must exceed the specials");
  }

  static CrossConfig from_json(const Json& j) {
    check_keys(j,
               {"family", "layers", "model_dim", "heads", "ff_dim", "max_seq",
                "context_k", "vocab_size"},
               "model config (cross_segment)");
    CrossConfig c;
    c.layers = get_or(j, "layers", c.layers);
    c.model_dim = get_or(j, "model_dim", c.model_dim);
    c.heads = get_or(j, "heads", c.heads);
    c.ff_dim = get_or(j, "ff_dim", c.ff_dim);
    c.max_seq = get_or(j, "max_seq", c.max_seq);
    c.context_k = get_or(j, "context_k", c.context_k);
    c.vocab_size = get_or(j, "vocab_size", c.vocab_size);
    c.validate();
    return c;
  }

  Json to_json() const {
    return Json{{"family", "cross_segment"}, {"layers", layers},
                {"model_dim", model_dim},    {"heads", heads},
                {"ff_dim", ff_dim},          {"max_seq", max_seq},
                {"context_k", context_k},    {"vocab_size", vocab_size}};
  }
};

// [CLS] + the <=k pieces left of the gap + [SEP] + the <=k pieces right of it
// + [SEP]. Windows never cross the document.
inline std::vector<int> extract_context(
    const std::vector<std::vector<int>>& sentence_ids, int gap, int k) {
  const int n = int(sentence_ids.size());
  require(n >= 2, "extract_context: document needs >= 2 sentences, has ", n);
  require(gap >= 0 && gap < n - 1, "extract_context: gap ", gap,
          " outside [0,", n - 1, ")");
  require(k >= 1, "extract_context: k must be >= 1");
  std::vector<int> left;
  for (int s = gap; s >= 0 && int(left.size()) < k; --s) {
    const auto& ids = sentence_ids[std::size_t(s)];
    for (auto it = ids.rbegin(); it != ids.rend() && int(left.size()) < k; ++it) {
      left.push_back(*it);
    }
  }
  std::vector<int> out;
  out.reserve(left.size() + 3);
  out.push_back(kClsId);
  out.insert(out.end(), left.rbegin(), left.rend());
  out.push_back(kSepId);
  for (int s = gap + 1; s < n && int(out.size()) < int(left.size()) + 2 + k; ++s) {
    const auto& ids = sentence_ids[std::size_t(s)];
    for (int id : ids) {
      if (int(out.size()) >= int(left.size()) + 2 + k) break;
      out.push_back(id);
    }
  }
  out.push_back(kSepId);
  return out;
}

// Word-piece context window around each candidate gap, encoded by a stack of
// pre-norm self-attention blocks; the [CLS] state feeds a two-way softmax.
class CrossSegmentModel : public Segmenter {
 public:
  static constexpr const char* kFamily = "cross_segment";

  CrossSegmentModel(CrossConfig config, Vocabulary vocab, std::uint64_t seed)
      : config_(config) {
    config_.validate();
    vocab.check_specials();
    vocab_ = std::move(vocab);
    init_params(seed);
  }

  CrossSegmentModel(CrossConfig config, Vocabulary vocab, ParamStore params)
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
  const CrossConfig& config() const { return config_; }

  EncodedDoc encode(const SegDocument& doc) const override {
    EncodedDoc enc;
    enc.labels = doc.labels;
    for (const auto& s : doc.sentences) {
      require(!s.word_tokens.empty(), "cross_segment: sentence without tokens in '",
              doc.doc_id, "'");
      std::vector<int> ids;
      for (const auto& w : s.word_tokens) {
        auto piece = wordpiece_encode_word(vocab_, w);
        ids.insert(ids.end(), piece.begin(), piece.end());
      }
      enc.sentence_ids.push_back(std::move(ids));
    }
    return enc;
  }

  // Probability node for one token window. The pad mask defaults to
  // "ids == [PAD]".
  NodeId forward_node(Graph& g, const std::vector<int>& ids,
                      std::vector<std::uint8_t> pad_mask = {}) const {
    const int len = int(ids.size());
    require(len >= 1, "cross_segment: empty input");
    require(len <= config_.max_seq, "cross_segment: input of ", len,
            " tokens exceeds max_seq ", config_.max_seq);
    if (pad_mask.empty()) {
      pad_mask.resize(std::size_t(len));
      for (int i = 0; i < len; ++i) pad_mask[std::size_t(i)] = ids[std::size_t(i)] == kPadId;
    }
    require(int(pad_mask.size()) == len, "cross_segment: mask length ",
            pad_mask.size(), " vs input length ", len);

    NodeId tok = g.gather(g.leaf("tok_embed", params_.at("tok_embed")), ids);
    NodeId pos = g.slice(g.leaf("pos_embed", params_.at("pos_embed")), 0, 0, len);
    NodeId x = g.add(tok, pos);
    for (int l = 0; l < config_.layers; ++l) {
      const std::string p = cat("l", l, ".");
      NodeId a = layer_norm(g, x, p + "ln1");
      NodeId q = g.split_heads(proj(g, a, p + "attn.wq", p + "attn.bq"), config_.heads);
      NodeId kk = g.split_heads(proj(g, a, p + "attn.wk", p + "attn.bk"), config_.heads);
      NodeId v = g.split_heads(proj(g, a, p + "attn.wv", p + "attn.bv"), config_.heads);
      NodeId att = g.merge_heads(g.attention(q, kk, v, pad_mask));
      x = g.add(x, proj(g, att, p + "attn.wo", p + "attn.bo"));
      NodeId f = layer_norm(g, x, p + "ln2");
      NodeId hid = g.gelu(proj(g, f, p + "ff.w1", p + "ff.b1"));
      x = g.add(x, proj(g, hid, p + "ff.w2", p + "ff.b2"));
    }
    NodeId final_x = layer_norm(g, x, "final_ln");
    NodeId cls = g.slice(final_x, 0, 0, 1);
    NodeId logits = g.add(g.matmul(cls, g.leaf("head.w", params_.at("head.w"))),
                          g.leaf("head.b", params_.at("head.b")));
    NodeId probs = g.softmax(logits);
    return g.slice(probs, 1, 1, 1);  // [1,1]
  }

  float forward_prob(const std::vector<int>& ids,
                     std::vector<std::uint8_t> pad_mask = {}) const {
    Graph g;
    NodeId p = forward_node(g, ids, std::move(pad_mask));
    return clamp_unit(g.value(p).data[0]);
  }

  NodeId candidate_probs_node(Graph& g, const EncodedDoc& doc) const override {
    require(doc.size() >= 2, "cross_segment: document needs >= 2 sentences, has ",
            doc.size());
    std::vector<NodeId> probs;
    probs.reserve(doc.size() - 1);
    for (int gap = 0; gap + 1 < int(doc.size()); ++gap) {
      probs.push_back(forward_node(
          g, extract_context(doc.sentence_ids, gap, config_.context_k)));
    }
    return probs.size() == 1 ? probs[0] : g.concat(probs, 0);
  }

  static std::int64_t expected_param_count(const CrossConfig& c, int vocab) {
    const std::int64_t d = c.model_dim, f = c.ff_dim;
    const std::int64_t per_layer = 2 * d          // ln1
                                   + 4 * d * d + 4 * d  // q,k,v,o
                                   + 2 * d              // ln2
                                   + d * f + f + f * d + d;
    return std::int64_t(vocab) * d + std::int64_t(c.max_seq) * d +
           c.layers * per_layer + 2 * d  // final ln
           + d * 2 + 2;                  // head
  }

 private:
  CrossConfig config_;

  NodeId proj(Graph& g, NodeId x, const std::string& w,
              const std::string& b) const {
    return g.add(g.matmul(x, g.leaf(w, params_.at(w))),
                 g.leaf(b, params_.at(b)));
  }

  NodeId layer_norm(Graph& g, NodeId x, const std::string& prefix) const {
    return g.layer_norm(x, g.leaf(prefix + ".g", params_.at(prefix + ".g")),
                        g.leaf(prefix + ".b", params_.at(prefix + ".b")));
  }

  void init_params(std::uint64_t seed) {
    const int d = config_.model_dim;
    auto weight = [&](const std::string& name, int in, int out) {
      params_[name] = seeded_init(
          {in, out}, InitScheme::uniform(1.0f / std::sqrt(float(in))),
          derive_seed(seed, name));
    };
    auto ln = [&](const std::string& prefix) {
      params_[prefix + ".g"] = Tensor::full({d}, 1.0f);
      params_[prefix + ".b"] = Tensor::zeros({d});
    };
    params_["tok_embed"] = seeded_init(
        {vocab_.size(), d}, InitScheme::uniform(1.0f / std::sqrt(float(d))),
        derive_seed(seed, "tok_embed"));
    params_["pos_embed"] = seeded_init(
        {config_.max_seq, d}, InitScheme::uniform(1.0f / std::sqrt(float(d))),
        derive_seed(seed, "pos_embed"));
    for (int l = 0; l < config_.layers; ++l) {
      const std::string p = cat("l", l, ".");
      ln(p + "ln1");
      for (const char* nm : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"}) {
        weight(p + nm, d, d);
      }
      for (const char* nm : {"attn.bq", "attn.bk", "attn.bv", "attn.bo"}) {
        params_[p + nm] = Tensor::zeros({d});
      }
      ln(p + "ln2");
      weight(p + "ff.w1", d, config_.ff_dim);
      params_[p + "ff.b1"] = Tensor::zeros({config_.ff_dim});
      weight(p + "ff.w2", config_.ff_dim, d);
      params_[p + "ff.b2"] = Tensor::zeros({d});
    }
    ln("final_ln");
    weight("head.w", d, 2);
    params_["head.b"] = Tensor::zeros({2});
  }

  void check_params() const {
    require(std::int64_t(param_count(params_)) ==
                expected_param_count(config_, vocab_.size()),
            "cross_segment: parameter table does not match config");
    require(params_.count("tok_embed") &&
                params_.at("tok_embed").shape ==
                    std::vector<int>({vocab_.size(), config_.model_dim}),
            "cross_segment: bad embedding shape for vocabulary of ",
            vocab_.size());
  }
};

}  // namespace topseg
