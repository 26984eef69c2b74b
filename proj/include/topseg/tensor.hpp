#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "topseg/common.hpp"
#include "topseg/rng.hpp"

namespace topseg {

// Dense float32 tensor, row-major. Shapes are immutable after construction;
// kernels allocate fresh outputs.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(std::size_t(numel_of(shape)), 0.0f);
  }

  static std::int64_t numel_of(const std::vector<int>& s) {
    require(!s.empty(), "tensor: rank-0 shape not supported");
    std::int64_t n = 1;
    for (int d : s) {
      require(d > 0, "tensor: non-positive dim in shape ", shape_str(s));
      n *= d;
    }
    return n;
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

  static Tensor full(std::vector<int> s, float v) {
    Tensor t(std::move(s));
    for (float& x : t.data) x = v;
    return t;
  }

  static Tensor row(std::vector<float> vals) {
    Tensor t;
    t.shape = {1, int(vals.size())};
    t.data = std::move(vals);
    return t;
  }

  std::int64_t numel() const { return std::int64_t(data.size()); }
  int rank() const { return int(shape.size()); }
  int dim(int i) const { return shape[std::size_t(i)]; }
  int rows() const { return shape[0]; }
  int cols() const { return shape[1]; }

  float& at(int i, int j) { return data[std::size_t(i) * cols() + j]; }
  float at(int i, int j) const { return data[std::size_t(i) * cols() + j]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline bool all_finite(const Tensor& t) {
  for (float v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline void check_finite(const Tensor& t, const char* what) {
  if (!all_finite(t)) throw NumericError(cat(what, ": non-finite value"));
}

// C = A(m,k) * B(k,n)
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.cols() == b.rows(),
          "matmul: incompatible shapes ", shape_str(a.shape), " x ",
          shape_str(b.shape));
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c({m, n});
  for (int i = 0; i < m; ++i) {
    const float* arow = &a.data[std::size_t(i) * k];
    float* crow = &c.data[std::size_t(i) * n];
    for (int p = 0; p < k; ++p) {
      const float av = arow[p];
      if (av == 0.0f) continue;
      const float* brow = &b.data[std::size_t(p) * n];
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

// C = A(m,k) * B(n,k)^T
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.cols() == b.cols(),
          "matmul_nt: incompatible shapes ", shape_str(a.shape), " x ",
          shape_str(b.shape), "^T");
  const int m = a.rows(), k = a.cols(), n = b.rows();
  Tensor c({m, n});
  for (int i = 0; i < m; ++i) {
    const float* arow = &a.data[std::size_t(i) * k];
    for (int j = 0; j < n; ++j) {
      const float* brow = &b.data[std::size_t(j) * k];
      float acc = 0.0f;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c.at(i, j) = acc;
    }
  }
  return c;
}

// C = A(k,m)^T * B(k,n)
inline Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.rows() == b.rows(),
          "matmul_tn: incompatible shapes ", shape_str(a.shape), "^T x ",
          shape_str(b.shape));
  const int k = a.rows(), m = a.cols(), n = b.cols();
  Tensor c({m, n});
  for (int p = 0; p < k; ++p) {
    const float* arow = &a.data[std::size_t(p) * m];
    const float* brow = &b.data[std::size_t(p) * n];
    for (int i = 0; i < m; ++i) {
      const float av = arow[i];
      if (av == 0.0f) continue;
      float* crow = &c.data[std::size_t(i) * n];
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

struct InitScheme {
  enum Kind { kUniform, kZeros } kind = kUniform;
  float bound = 0.0f;  // uniform range is [-bound, bound]

  static InitScheme uniform(float bound) { return {kUniform, bound}; }
  static InitScheme zeros() { return {kZeros, 0.0f}; }
};

inline Tensor seeded_init(std::vector<int> shape, const InitScheme& scheme,
                          std::uint64_t seed) {
  Tensor t(std::move(shape));
  if (scheme.kind == InitScheme::kZeros) return t;
  Rng rng(seed);
  for (float& v : t.data) v = rng.uniform_sym(scheme.bound);
  return t;
}

// Named parameter set. std::map so iteration order (and therefore clipping,
// optimizer updates, and checkpoint layout) is stable.
using ParamStore = std::map<std::string, Tensor>;
using GradMap = std::map<std::string, Tensor>;

inline std::int64_t param_count(const ParamStore& params) {
  std::int64_t n = 0;
  for (const auto& [name, t] : params) n += t.numel();
  return n;
}

}  // namespace topseg
