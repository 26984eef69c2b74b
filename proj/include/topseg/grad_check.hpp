#pragma once

#include <cmath>
#include <functional>

#include "topseg/graph.hpp"
#include "topseg/tensor.hpp"

namespace topseg {

// Builds the function under test as a graph over leaves bound from `params`
// and returns the loss node. Called many times with perturbed parameters.
using ScalarGraphFn = std::function<NodeId(Graph&, const ParamStore&)>;

namespace detail {
inline double eval_scalar(const ScalarGraphFn& f, const ParamStore& params) {
  Graph g;
  NodeId loss = f(g, params);
  const Tensor& v = g.value(loss);
  require(v.numel() == 1, "grad_check: function must produce a scalar, got ",
          shape_str(v.shape));
  double out = double(v.data[0]);
  if (!std::isfinite(out)) throw NumericError("grad_check: non-finite value");
  return out;
}
}  // namespace detail

// Central-difference check of every coordinate of every parameter. Returns
// max over coordinates of |analytic - numeric| / max(1, |analytic|,
// |numeric|). Meaningless at nondifferentiable points (max-pool ties).
inline double grad_check(const ScalarGraphFn& f, ParamStore& params,
                         double epsilon = 1e-3) {
  require(epsilon > 0.0, "grad_check: epsilon must be positive");
  Graph g;
  NodeId loss = f(g, params);
  require(g.value(loss).numel() == 1,
          "grad_check: function must produce a scalar");
  if (!std::isfinite(double(g.value(loss).data[0]))) {
    throw NumericError("grad_check: non-finite value");
  }
  GradMap analytic = g.backward(loss);

  double worst = 0.0;
  for (auto& [name, tensor] : params) {
    auto it = analytic.find(name);
    const Tensor* a = it == analytic.end() ? nullptr : &it->second;
    for (std::size_t i = 0; i < tensor.data.size(); ++i) {
      const float saved = tensor.data[i];
      tensor.data[i] = float(saved + epsilon);
      const double up = detail::eval_scalar(f, params);
      tensor.data[i] = float(saved - epsilon);
      const double down = detail::eval_scalar(f, params);
      tensor.data[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double ana = a ? double(a->data[i]) : 0.0;
      const double rel = std::abs(ana - numeric) /
                         std::max({1.0, std::abs(ana), std::abs(numeric)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace topseg
