#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "topseg/common.hpp"
#include "topseg/tensor.hpp"

namespace topseg {

// Adam moments, one pair per parameter. Created zeroed, shapes mirror the
// parameters.
struct OptimizerState {
  std::int64_t step_count = 0;
  std::map<std::string, Tensor> m, v;

  static OptimizerState for_params(const ParamStore& params) {
    OptimizerState s;
    for (const auto& [name, t] : params) {
      s.m.emplace(name, Tensor::zeros(t.shape));
      s.v.emplace(name, Tensor::zeros(t.shape));
    }
    return s;
  }
};

// Bias-corrected Adam, applied in place. Parameters without a gradient entry
// are left untouched; a zero gradient with fresh state is a no-op.
inline void adam_step(ParamStore& params, const GradMap& grads,
                      OptimizerState& state, double lr, double beta1 = 0.9,
                      double beta2 = 0.999, double eps = 1e-8) {
  state.step_count += 1;
  const double c1 = 1.0 - std::pow(beta1, double(state.step_count));
  const double c2 = 1.0 - std::pow(beta2, double(state.step_count));
  for (auto& [name, grad] : grads) {
    auto pit = params.find(name);
    require(pit != params.end(), "adam_step: gradient for unknown parameter '",
            name, "'");
    Tensor& p = pit->second;
    require(p.shape == grad.shape, "adam_step: '", name, "' has shape ",
            shape_str(p.shape), " but gradient ", shape_str(grad.shape));
    Tensor& m = state.m.at(name);
    Tensor& v = state.v.at(name);
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      const double g = grad.data[i];
      const double mi = beta1 * m.data[i] + (1.0 - beta1) * g;
      const double vi = beta2 * v.data[i] + (1.0 - beta2) * g * g;
      m.data[i] = float(mi);
      v.data[i] = float(vi);
      const double mhat = mi / c1;
      const double vhat = vi / c2;
      p.data[i] = float(p.data[i] - lr * mhat / (std::sqrt(vhat) + eps));
    }
  }
}

inline double grad_global_norm(const GradMap& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) {
    for (float v : g.data) sq += double(v) * v;
  }
  return std::sqrt(sq);
}

// Scales all gradients so the global norm is at most max_norm.
inline void clip_gradients(GradMap& grads, double max_norm) {
  require(max_norm > 0.0, "clip_gradients: max_norm must be positive");
  const double norm = grad_global_norm(grads);
  if (norm <= max_norm) return;
  const float s = float(max_norm / norm);
  for (auto& [name, g] : grads) {
    for (float& v : g.data) v *= s;
  }
}

}  // namespace topseg
