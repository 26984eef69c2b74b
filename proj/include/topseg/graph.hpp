#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "topseg/common.hpp"
#include "topseg/losses.hpp"
#include "topseg/tensor.hpp"

namespace topseg {

using NodeId = int;

enum class OpKind {
  kLeaf,
  kConst,
  kMatmul,
  kAdd,
  kAddBias,
  kMul,
  kScale,
  kConcat,
  kSlice,
  kGather,
  kSigmoid,
  kTanh,
  kGelu,
  kLog,
  kSoftmax,
  kReduceMax0,
  kReduceSum,
  kLayerNorm,
  kAttention,
  kSplitHeads,
  kMergeHeads,
  kBatchLoss,
};

// Reverse-mode tape. Ops execute eagerly; insertion order is already a
// topological order, so backward is a single reverse sweep.
class Graph {
 public:
  struct Node {
    OpKind kind;
    std::vector<NodeId> inputs;
    Tensor value;
    Tensor aux;  // saved forward state some backwards need
    int axis = 0, start = 0, len = 0, heads = 0;
    float scalar = 0.0f;
    std::vector<int> ids;  // gather indices, argmax rows, loss labels
    std::vector<std::uint8_t> mask;
    LossSpec loss;
    std::string name;
  };

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(NodeId id) const { return at(id).value; }

  // Leaves are deduplicated by name so a batch of forwards shares one
  // parameter node and gradients accumulate across the whole batch.
  NodeId leaf(const std::string& name, const Tensor& value) {
    auto it = leaf_ids_.find(name);
    if (it != leaf_ids_.end()) {
      require(at(it->second).value.shape == value.shape,
              "leaf: shape changed for '", name, "'");
      return it->second;
    }
    Node n;
    n.kind = OpKind::kLeaf;
    n.value = value;
    n.name = name;
    NodeId id = push(std::move(n));
    leaf_ids_.emplace(name, id);
    return id;
  }

  NodeId constant(Tensor value) {
    Node n;
    n.kind = OpKind::kConst;
    n.value = std::move(value);
    return push(std::move(n));
  }

  NodeId matmul(NodeId a, NodeId b) {
    Node n;
    n.kind = OpKind::kMatmul;
    n.inputs = {a, b};
    n.value = topseg::matmul(val(a), val(b));
    return push(std::move(n));
  }

  // Same shapes, or b a vector broadcast over the rows of a.
  NodeId add(NodeId a, NodeId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    Node n;
    n.inputs = {a, b};
    if (ta.shape == tb.shape) {
      n.kind = OpKind::kAdd;
      n.value = ta;
      for (std::size_t i = 0; i < n.value.data.size(); ++i) {
        n.value.data[i] += tb.data[i];
      }
    } else {
      require(ta.rank() == 2 && tb.rank() == 1 && tb.dim(0) == ta.cols(),
              "add: incompatible shapes ", shape_str(ta.shape), " + ",
              shape_str(tb.shape));
      n.kind = OpKind::kAddBias;
      n.value = ta;
      for (int i = 0; i < ta.rows(); ++i) {
        for (int j = 0; j < ta.cols(); ++j) {
          n.value.at(i, j) += tb.data[std::size_t(j)];
        }
      }
    }
    return push(std::move(n));
  }

  NodeId mul(NodeId a, NodeId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require(ta.shape == tb.shape, "mul: shape mismatch ", shape_str(ta.shape),
            " vs ", shape_str(tb.shape));
    Node n;
    n.kind = OpKind::kMul;
    n.inputs = {a, b};
    n.value = ta;
    for (std::size_t i = 0; i < n.value.data.size(); ++i) {
      n.value.data[i] *= tb.data[i];
    }
    return push(std::move(n));
  }

  NodeId scale(NodeId a, float c) {
    Node n;
    n.kind = OpKind::kScale;
    n.inputs = {a};
    n.scalar = c;
    n.value = val(a);
    for (float& v : n.value.data) v *= c;
    return push(std::move(n));
  }

  NodeId concat(const std::vector<NodeId>& parts, int axis) {
    require(!parts.empty(), "concat: no inputs");
    require(axis == 0 || axis == 1, "concat: axis must be 0 or 1, got ", axis);
    const Tensor& first = val(parts[0]);
    require(first.rank() == 2, "concat: rank-2 inputs required");
    int other = axis == 0 ? first.cols() : first.rows();
    int total = 0;
    for (NodeId p : parts) {
      const Tensor& t = val(p);
      require(t.rank() == 2, "concat: rank-2 inputs required");
      int o = axis == 0 ? t.cols() : t.rows();
      require(o == other, "concat: mismatched shapes ", shape_str(first.shape),
              " vs ", shape_str(t.shape));
      total += axis == 0 ? t.rows() : t.cols();
    }
    Node n;
    n.kind = OpKind::kConcat;
    n.inputs = parts;
    n.axis = axis;
    if (axis == 0) {
      n.value = Tensor({total, other});
      int r = 0;
      for (NodeId p : parts) {
        const Tensor& t = val(p);
        std::copy(t.data.begin(), t.data.end(),
                  n.value.data.begin() + std::size_t(r) * other);
        r += t.rows();
      }
    } else {
      n.value = Tensor({other, total});
      int c0 = 0;
      for (NodeId p : parts) {
        const Tensor& t = val(p);
        for (int i = 0; i < other; ++i) {
          for (int j = 0; j < t.cols(); ++j) {
            n.value.at(i, c0 + j) = t.at(i, j);
          }
        }
        c0 += t.cols();
      }
    }
    return push(std::move(n));
  }

  NodeId slice(NodeId a, int axis, int start, int len) {
    const Tensor& t = val(a);
    require(t.rank() == 2, "slice: rank-2 input required");
    require(axis == 0 || axis == 1, "slice: axis must be 0 or 1, got ", axis);
    int extent = axis == 0 ? t.rows() : t.cols();
    require(start >= 0 && len > 0 && start + len <= extent,
            "slice: range [", start, ",", start + len, ") outside axis ", axis,
            " of ", shape_str(t.shape));
    Node n;
    n.kind = OpKind::kSlice;
    n.inputs = {a};
    n.axis = axis;
    n.start = start;
    n.len = len;
    if (axis == 0) {
      n.value = Tensor({len, t.cols()});
      std::copy(t.data.begin() + std::size_t(start) * t.cols(),
                t.data.begin() + std::size_t(start + len) * t.cols(),
                n.value.data.begin());
    } else {
      n.value = Tensor({t.rows(), len});
      for (int i = 0; i < t.rows(); ++i) {
        for (int j = 0; j < len; ++j) n.value.at(i, j) = t.at(i, start + j);
      }
    }
    return push(std::move(n));
  }

  // rows of `table` selected by id; backward scatter-adds.
  NodeId gather(NodeId table, std::vector<int> ids) {
    const Tensor& t = val(table);
    require(t.rank() == 2, "gather: rank-2 table required");
    require(!ids.empty(), "gather: empty id list");
    Node n;
    n.kind = OpKind::kGather;
    n.inputs = {table};
    n.value = Tensor({int(ids.size()), t.cols()});
    for (std::size_t i = 0; i < ids.size(); ++i) {
      int id = ids[i];
      require(id >= 0 && id < t.rows(), "gather: id ", id,
              " outside table with ", t.rows(), " rows");
      std::copy(t.data.begin() + std::size_t(id) * t.cols(),
                t.data.begin() + std::size_t(id + 1) * t.cols(),
                n.value.data.begin() + i * std::size_t(t.cols()));
    }
    n.ids = std::move(ids);
    return push(std::move(n));
  }

  NodeId sigmoid(NodeId a) {
    Node n;
    n.kind = OpKind::kSigmoid;
    n.inputs = {a};
    n.value = val(a);
    for (float& v : n.value.data) v = 1.0f / (1.0f + std::exp(-v));
    return push(std::move(n));
  }

  NodeId tanh(NodeId a) {
    Node n;
    n.kind = OpKind::kTanh;
    n.inputs = {a};
    n.value = val(a);
    for (float& v : n.value.data) v = std::tanh(v);
    return push(std::move(n));
  }

  NodeId gelu(NodeId a) {
    Node n;
    n.kind = OpKind::kGelu;
    n.inputs = {a};
    n.value = val(a);
    for (float& v : n.value.data) v = gelu_fwd(v);
    return push(std::move(n));
  }

  NodeId log(NodeId a) {
    Node n;
    n.kind = OpKind::kLog;
    n.inputs = {a};
    n.value = val(a);
    for (float& v : n.value.data) v = std::log(v);
    return push(std::move(n));
  }

  // Rowwise, max-subtracted.
  NodeId softmax(NodeId a) {
    const Tensor& t = val(a);
    require(t.rank() == 2, "softmax: rank-2 input required");
    Node n;
    n.kind = OpKind::kSoftmax;
    n.inputs = {a};
    n.value = t;
    for (int i = 0; i < t.rows(); ++i) {
      softmax_row(&n.value.data[std::size_t(i) * t.cols()], t.cols());
    }
    return push(std::move(n));
  }

  // Max over axis 0: [n,c] -> [1,c]. Ties route the gradient to the first
  // maximal row, so the op is not differentiable at exact ties.
  NodeId reduce_max0(NodeId a) {
    const Tensor& t = val(a);
    require(t.rank() == 2, "reduce_max: rank-2 input required");
    Node n;
    n.kind = OpKind::kReduceMax0;
    n.inputs = {a};
    n.value = Tensor({1, t.cols()});
    n.ids.assign(std::size_t(t.cols()), 0);
    for (int j = 0; j < t.cols(); ++j) {
      float best = t.at(0, j);
      int arg = 0;
      for (int i = 1; i < t.rows(); ++i) {
        if (t.at(i, j) > best) {
          best = t.at(i, j);
          arg = i;
        }
      }
      n.value.at(0, j) = best;
      n.ids[std::size_t(j)] = arg;
    }
    return push(std::move(n));
  }

  NodeId reduce_sum(NodeId a) {
    Node n;
    n.kind = OpKind::kReduceSum;
    n.inputs = {a};
    double acc = 0.0;
    for (float v : val(a).data) acc += v;
    n.value = Tensor({1});
    n.value.data[0] = float(acc);
    return push(std::move(n));
  }

  // Normalizes the last axis of x, then applies gain and bias (both [d]).
  NodeId layer_norm(NodeId x, NodeId gain, NodeId bias) {
    const Tensor& t = val(x);
    const Tensor& g = val(gain);
    const Tensor& b = val(bias);
    require(t.rank() == 2, "layer_norm: rank-2 input required");
    require(g.rank() == 1 && g.dim(0) == t.cols() && b.shape == g.shape,
            "layer_norm: gain/bias must be [", t.cols(), "]");
    Node n;
    n.kind = OpKind::kLayerNorm;
    n.inputs = {x, gain, bias};
    n.value = Tensor({t.rows(), t.cols()});
    n.aux = Tensor({t.rows(), 2});  // per-row mean, 1/std
    const int d = t.cols();
    for (int i = 0; i < t.rows(); ++i) {
      double mean = 0.0;
      for (int j = 0; j < d; ++j) mean += t.at(i, j);
      mean /= d;
      double var = 0.0;
      for (int j = 0; j < d; ++j) {
        double c = t.at(i, j) - mean;
        var += c * c;
      }
      var /= d;
      double rstd = 1.0 / std::sqrt(var + kLnEps);
      n.aux.at(i, 0) = float(mean);
      n.aux.at(i, 1) = float(rstd);
      for (int j = 0; j < d; ++j) {
        float xhat = float((t.at(i, j) - mean) * rstd);
        n.value.at(i, j) = xhat * g.data[std::size_t(j)] + b.data[std::size_t(j)];
      }
    }
    return push(std::move(n));
  }

  // q,k,v: [heads, seq, dh]. key_pad marks key positions to ignore (1 = pad).
  // Scores are scaled by 1/sqrt(dh).
  NodeId attention(NodeId q, NodeId k, NodeId v,
                   std::vector<std::uint8_t> key_pad) {
    const Tensor& tq = val(q);
    const Tensor& tk = val(k);
    const Tensor& tv = val(v);
    require(tq.rank() == 3 && tq.shape == tk.shape && tq.shape == tv.shape,
            "attention: q/k/v must share a [heads,seq,dh] shape, got ",
            shape_str(tq.shape), " ", shape_str(tk.shape), " ",
            shape_str(tv.shape));
    const int h = tq.dim(0), s = tq.dim(1), dh = tq.dim(2);
    require(key_pad.size() == std::size_t(s), "attention: mask length ",
            key_pad.size(), " vs seq ", s);
    bool any_live = false;
    for (auto m : key_pad) any_live |= m == 0;
    require(any_live, "attention: every key masked");
    Node n;
    n.kind = OpKind::kAttention;
    n.inputs = {q, k, v};
    n.mask = std::move(key_pad);
    n.value = Tensor({h, s, dh});
    n.aux = Tensor({h, s, s});
    const float inv = 1.0f / std::sqrt(float(dh));
    for (int a = 0; a < h; ++a) {
      const float* Q = head_ptr(tq, a);
      const float* K = head_ptr(tk, a);
      const float* V = head_ptr(tv, a);
      float* P = &n.aux.data[std::size_t(a) * s * s];
      float* O = &n.value.data[std::size_t(a) * s * dh];
      for (int i = 0; i < s; ++i) {
        float* prow = P + std::size_t(i) * s;
        for (int j = 0; j < s; ++j) {
          if (n.mask[std::size_t(j)]) {
            prow[j] = kMaskedScore;
            continue;
          }
          const float* qi = Q + std::size_t(i) * dh;
          const float* kj = K + std::size_t(j) * dh;
          float acc = 0.0f;
          for (int p = 0; p < dh; ++p) acc += qi[p] * kj[p];
          prow[j] = acc * inv;
        }
        softmax_row(prow, s);
        float* orow = O + std::size_t(i) * dh;
        for (int j = 0; j < s; ++j) {
          const float pv = prow[j];
          if (pv == 0.0f) continue;
          const float* vj = V + std::size_t(j) * dh;
          for (int p = 0; p < dh; ++p) orow[p] += pv * vj[p];
        }
      }
    }
    return push(std::move(n));
  }

  // [s, d] -> [heads, s, d/heads]
  NodeId split_heads(NodeId a, int heads) {
    const Tensor& t = val(a);
    require(t.rank() == 2, "split_heads: rank-2 input required");
    require(heads > 0 && t.cols() % heads == 0, "split_heads: ", heads,
            " heads do not divide width ", t.cols());
    const int s = t.rows(), dh = t.cols() / heads;
    Node n;
    n.kind = OpKind::kSplitHeads;
    n.inputs = {a};
    n.heads = heads;
    n.value = Tensor({heads, s, dh});
    for (int a2 = 0; a2 < heads; ++a2) {
      for (int i = 0; i < s; ++i) {
        for (int j = 0; j < dh; ++j) {
          n.value.data[(std::size_t(a2) * s + i) * dh + j] =
              t.at(i, a2 * dh + j);
        }
      }
    }
    return push(std::move(n));
  }

  // [heads, s, dh] -> [s, heads*dh]
  NodeId merge_heads(NodeId a) {
    const Tensor& t = val(a);
    require(t.rank() == 3, "merge_heads: rank-3 input required");
    const int h = t.dim(0), s = t.dim(1), dh = t.dim(2);
    Node n;
    n.kind = OpKind::kMergeHeads;
    n.inputs = {a};
    n.value = Tensor({s, h * dh});
    for (int a2 = 0; a2 < h; ++a2) {
      for (int i = 0; i < s; ++i) {
        for (int j = 0; j < dh; ++j) {
          n.value.at(i, a2 * dh + j) = t.data[(std::size_t(a2) * s + i) * dh + j];
        }
      }
    }
    return push(std::move(n));
  }

  // probs: [N,1] or [N]; one label per row. Value is the mean per-example
  // loss, accumulated in double.
  NodeId batch_loss(NodeId probs, std::vector<int> labels,
                    const LossSpec& spec) {
    spec.validate();
    const Tensor& t = val(probs);
    std::int64_t nex = t.numel();
    require(nex > 0, "batch_loss: empty batch");
    require(t.rank() == 1 || (t.rank() == 2 && t.cols() == 1),
            "batch_loss: probabilities must be a column, got ",
            shape_str(t.shape));
    require(std::size_t(nex) == labels.size(), "batch_loss: ", nex,
            " probabilities vs ", labels.size(), " labels");
    Node n;
    n.kind = OpKind::kBatchLoss;
    n.inputs = {probs};
    n.loss = spec;
    double acc = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      acc += loss_value(spec, double(t.data[i]), labels[i]);
    }
    n.ids = std::move(labels);
    n.value = Tensor({1});
    n.value.data[0] = float(acc / double(nex));
    return push(std::move(n));
  }

  // Gradient of `loss` w.r.t. every leaf. Leaves the loss does not reach get
  // zero gradients.
  GradMap backward(NodeId loss) const {
    require(at(loss).value.numel() == 1,
            "backward: loss must be scalar, has shape ",
            shape_str(at(loss).value.shape));
    std::vector<Tensor> grads(nodes_.size());
    grads[std::size_t(loss)] = Tensor::full(at(loss).value.shape, 1.0f);
    for (NodeId id = loss; id >= 0; --id) {
      const Node& n = at(id);
      Tensor& g = grads[std::size_t(id)];
      if (g.data.empty()) continue;
      step_back(n, g, grads);
    }
    GradMap out;
    for (const auto& [name, id] : leaf_ids_) {
      Tensor& g = grads[std::size_t(id)];
      out[name] = g.data.empty() ? Tensor::zeros(at(id).value.shape)
                                 : std::move(g);
    }
    return out;
  }

 private:
  static constexpr double kLnEps = 1e-5;
  static constexpr float kMaskedScore = -1e9f;

  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeId> leaf_ids_;

  const Node& at(NodeId id) const { return nodes_[std::size_t(id)]; }
  const Tensor& val(NodeId id) const { return at(id).value; }

  NodeId push(Node n) {
    nodes_.push_back(std::move(n));
    return NodeId(nodes_.size() - 1);
  }

  static const float* head_ptr(const Tensor& t, int head) {
    return &t.data[std::size_t(head) * t.dim(1) * t.dim(2)];
  }
  static float* head_ptr(Tensor& t, int head) {
    return &t.data[std::size_t(head) * t.dim(1) * t.dim(2)];
  }

  static void softmax_row(float* row, int n) {
    float mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      float e = std::exp(row[j] - mx);
      row[j] = e;
      sum += e;
    }
    float inv = float(1.0 / sum);
    for (int j = 0; j < n; ++j) row[j] *= inv;
  }

  static float gelu_fwd(float x) {
    constexpr float c = 0.7978845608028654f;  // sqrt(2/pi)
    float u = c * (x + 0.044715f * x * x * x);
    return 0.5f * x * (1.0f + std::tanh(u));
  }

  static float gelu_bwd(float x) {
    constexpr float c = 0.7978845608028654f;
    float u = c * (x + 0.044715f * x * x * x);
    float t = std::tanh(u);
    float du = c * (1.0f + 3.0f * 0.044715f * x * x);
    return 0.5f * (1.0f + t) + 0.5f * x * (1.0f - t * t) * du;
  }

  static void accumulate(Tensor& into, const std::vector<int>& shape,
                         const Tensor& delta) {
    if (into.data.empty()) into = Tensor::zeros(shape);
    for (std::size_t i = 0; i < into.data.size(); ++i) {
      into.data[i] += delta.data[i];
    }
  }

  Tensor& grad_buf(std::vector<Tensor>& grads, NodeId id) const {
    Tensor& g = grads[std::size_t(id)];
    if (g.data.empty()) g = Tensor::zeros(at(id).value.shape);
    return g;
  }

  void step_back(const Node& n, const Tensor& g,
                 std::vector<Tensor>& grads) const {
    switch (n.kind) {
      case OpKind::kLeaf:
      case OpKind::kConst:
        return;
      case OpKind::kMatmul: {
        const Tensor& a = val(n.inputs[0]);
        const Tensor& b = val(n.inputs[1]);
        accumulate(grads[std::size_t(n.inputs[0])], a.shape, matmul_nt(g, b));
        accumulate(grads[std::size_t(n.inputs[1])], b.shape, matmul_tn(a, g));
        return;
      }
      case OpKind::kAdd: {
        for (int k = 0; k < 2; ++k) {
          Tensor& gi = grad_buf(grads, n.inputs[std::size_t(k)]);
          for (std::size_t i = 0; i < g.data.size(); ++i) {
            gi.data[i] += g.data[i];
          }
        }
        return;
      }
      case OpKind::kAddBias: {
        Tensor& ga = grad_buf(grads, n.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
        Tensor& gb = grad_buf(grads, n.inputs[1]);
        const int cols = n.value.cols();
        for (int i = 0; i < n.value.rows(); ++i) {
          for (int j = 0; j < cols; ++j) gb.data[std::size_t(j)] += g.at(i, j);
        }
        return;
      }
      case OpKind::kMul: {
        const Tensor& a = val(n.inputs[0]);
        const Tensor& b = val(n.inputs[1]);
        Tensor& ga = grad_buf(grads, n.inputs[0]);
        Tensor& gb = grad_buf(grads, n.inputs[1]);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          ga.data[i] += g.data[i] * b.data[i];
          gb.data[i] += g.data[i] * a.data[i];
        }
        return;
      }
      case OpKind::kScale: {
        Tensor& ga = grad_buf(grads, n.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          ga.data[i] += g.data[i] * n.scalar;
        }
        return;
      }
      case OpKind::kConcat: {
        if (n.axis == 0) {
          int r = 0;
          for (NodeId p : n.inputs) {
            const Tensor& t = val(p);
            Tensor& gp = grad_buf(grads, p);
            const std::size_t base = std::size_t(r) * t.cols();
            for (std::size_t i = 0; i < gp.data.size(); ++i) {
              gp.data[i] += g.data[base + i];
            }
            r += t.rows();
          }
        } else {
          int c0 = 0;
          for (NodeId p : n.inputs) {
            const Tensor& t = val(p);
            Tensor& gp = grad_buf(grads, p);
            for (int i = 0; i < t.rows(); ++i) {
              for (int j = 0; j < t.cols(); ++j) {
                gp.at(i, j) += g.at(i, c0 + j);
              }
            }
            c0 += t.cols();
          }
        }
        return;
      }
      case OpKind::kSlice: {
        const Tensor& t = val(n.inputs[0]);
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        if (n.axis == 0) {
          const std::size_t base = std::size_t(n.start) * t.cols();
          for (std::size_t i = 0; i < g.data.size(); ++i) {
            gi.data[base + i] += g.data[i];
          }
        } else {
          for (int i = 0; i < t.rows(); ++i) {
            for (int j = 0; j < n.len; ++j) {
              gi.at(i, n.start + j) += g.at(i, j);
            }
          }
        }
        return;
      }
      case OpKind::kGather: {
        const Tensor& t = val(n.inputs[0]);
        Tensor& gt = grad_buf(grads, n.inputs[0]);
        for (std::size_t i = 0; i < n.ids.size(); ++i) {
          const std::size_t dst = std::size_t(n.ids[i]) * t.cols();
          const std::size_t src = i * std::size_t(t.cols());
          for (int j = 0; j < t.cols(); ++j) {
            gt.data[dst + j] += g.data[src + j];
          }
        }
        return;
      }
      case OpKind::kSigmoid: {
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          float y = n.value.data[i];
          gi.data[i] += g.data[i] * y * (1.0f - y);
        }
        return;
      }
      case OpKind::kTanh: {
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          float y = n.value.data[i];
          gi.data[i] += g.data[i] * (1.0f - y * y);
        }
        return;
      }
      case OpKind::kGelu: {
        const Tensor& x = val(n.inputs[0]);
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          gi.data[i] += g.data[i] * gelu_bwd(x.data[i]);
        }
        return;
      }
      case OpKind::kLog: {
        const Tensor& x = val(n.inputs[0]);
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          gi.data[i] += g.data[i] / x.data[i];
        }
        return;
      }
      case OpKind::kSoftmax: {
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        const int cols = n.value.cols();
        for (int i = 0; i < n.value.rows(); ++i) {
          double dot = 0.0;
          for (int j = 0; j < cols; ++j) {
            dot += double(g.at(i, j)) * n.value.at(i, j);
          }
          for (int j = 0; j < cols; ++j) {
            gi.at(i, j) +=
                n.value.at(i, j) * (g.at(i, j) - float(dot));
          }
        }
        return;
      }
      case OpKind::kReduceMax0: {
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        for (int j = 0; j < n.value.cols(); ++j) {
          gi.at(n.ids[std::size_t(j)], j) += g.at(0, j);
        }
        return;
      }
      case OpKind::kReduceSum: {
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        for (float& v : gi.data) v += g.data[0];
        return;
      }
      case OpKind::kLayerNorm: {
        const Tensor& x = val(n.inputs[0]);
        const Tensor& gain = val(n.inputs[1]);
        Tensor& gx = grad_buf(grads, n.inputs[0]);
        Tensor& gg = grad_buf(grads, n.inputs[1]);
        Tensor& gb = grad_buf(grads, n.inputs[2]);
        const int d = x.cols();
        for (int i = 0; i < x.rows(); ++i) {
          const float mean = n.aux.at(i, 0);
          const float rstd = n.aux.at(i, 1);
          double sum_gy = 0.0, sum_gyx = 0.0;
          for (int j = 0; j < d; ++j) {
            float xhat = (x.at(i, j) - mean) * rstd;
            float gy = g.at(i, j) * gain.data[std::size_t(j)];
            sum_gy += gy;
            sum_gyx += double(gy) * xhat;
            gg.data[std::size_t(j)] += g.at(i, j) * xhat;
            gb.data[std::size_t(j)] += g.at(i, j);
          }
          const float m_gy = float(sum_gy / d);
          const float m_gyx = float(sum_gyx / d);
          for (int j = 0; j < d; ++j) {
            float xhat = (x.at(i, j) - mean) * rstd;
            float gy = g.at(i, j) * gain.data[std::size_t(j)];
            gx.at(i, j) += rstd * (gy - m_gy - xhat * m_gyx);
          }
        }
        return;
      }
      case OpKind::kAttention: {
        const Tensor& tq = val(n.inputs[0]);
        const Tensor& tk = val(n.inputs[1]);
        const Tensor& tv = val(n.inputs[2]);
        Tensor& gq = grad_buf(grads, n.inputs[0]);
        Tensor& gk = grad_buf(grads, n.inputs[1]);
        Tensor& gv = grad_buf(grads, n.inputs[2]);
        const int h = tq.dim(0), s = tq.dim(1), dh = tq.dim(2);
        const float inv = 1.0f / std::sqrt(float(dh));
        std::vector<float> dp(static_cast<std::size_t>(s));
        for (int a = 0; a < h; ++a) {
          const float* Q = head_ptr(tq, a);
          const float* K = head_ptr(tk, a);
          const float* V = head_ptr(tv, a);
          const float* P = &n.aux.data[std::size_t(a) * s * s];
          const float* GO = &g.data[std::size_t(a) * s * dh];
          float* GQ = head_ptr(gq, a);
          float* GK = head_ptr(gk, a);
          float* GV = head_ptr(gv, a);
          for (int i = 0; i < s; ++i) {
            const float* prow = P + std::size_t(i) * s;
            const float* go = GO + std::size_t(i) * dh;
            // dV += P^T dO; dP = dO V^T
            double dot = 0.0;
            for (int j = 0; j < s; ++j) {
              const float* vj = V + std::size_t(j) * dh;
              float acc = 0.0f;
              for (int p = 0; p < dh; ++p) acc += go[p] * vj[p];
              dp[std::size_t(j)] = acc;
              dot += double(acc) * prow[j];
              if (prow[j] != 0.0f) {
                float* gvj = GV + std::size_t(j) * dh;
                for (int p = 0; p < dh; ++p) gvj[p] += prow[j] * go[p];
              }
            }
            // softmax backward rowwise, then through the scaled scores
            float* gqi = GQ + std::size_t(i) * dh;
            for (int j = 0; j < s; ++j) {
              float ds = prow[j] * (dp[std::size_t(j)] - float(dot)) * inv;
              if (ds == 0.0f) continue;
              const float* kj = K + std::size_t(j) * dh;
              const float* qi = Q + std::size_t(i) * dh;
              float* gkj = GK + std::size_t(j) * dh;
              for (int p = 0; p < dh; ++p) {
                gqi[p] += ds * kj[p];
                gkj[p] += ds * qi[p];
              }
            }
          }
        }
        return;
      }
      case OpKind::kSplitHeads: {
        const Tensor& t = val(n.inputs[0]);
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        const int s = t.rows(), dh = t.cols() / n.heads;
        for (int a = 0; a < n.heads; ++a) {
          for (int i = 0; i < s; ++i) {
            for (int j = 0; j < dh; ++j) {
              gi.at(i, a * dh + j) += g.data[(std::size_t(a) * s + i) * dh + j];
            }
          }
        }
        return;
      }
      case OpKind::kMergeHeads: {
        const Tensor& t = val(n.inputs[0]);
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        const int h = t.dim(0), s = t.dim(1), dh = t.dim(2);
        for (int a = 0; a < h; ++a) {
          for (int i = 0; i < s; ++i) {
            for (int j = 0; j < dh; ++j) {
              gi.data[(std::size_t(a) * s + i) * dh + j] += g.at(i, a * dh + j);
            }
          }
        }
        return;
      }
      case OpKind::kBatchLoss: {
        const Tensor& p = val(n.inputs[0]);
        Tensor& gi = grad_buf(grads, n.inputs[0]);
        const double scale = double(g.data[0]) / double(p.numel());
        for (std::size_t i = 0; i < n.ids.size(); ++i) {
          gi.data[i] +=
              float(scale * loss_dp(n.loss, double(p.data[i]), n.ids[i]));
        }
        return;
      }
    }
    throw Error("backward: unhandled op");
  }
};

}  // namespace topseg
