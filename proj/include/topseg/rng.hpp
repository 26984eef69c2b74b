#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace topseg {

// splitmix64. Chosen over std engines so that streams are identical across
// standard libraries; every random choice in the toolkit flows from one of
// these seeded explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // [0,1)
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // [-a, a]
  float uniform_sym(float a) { return float(a * (2.0 * next_unit() - 1.0)); }

  // [0, n)
  std::size_t next_below(std::size_t n) { return std::size_t(next_u64() % n); }

  double normal(double mean, double sd) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sd * spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_unit() - 1.0;
      v = 2.0 * next_unit() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return mean + sd * u * m;
  }

  // Fisher-Yates; std::shuffle ordering is implementation-defined, this is not.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a over an arbitrary tag, folded into a base seed. Used to give every
// parameter, epoch, and grid cell its own reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (int shift = 0; shift < 64; shift += 8) {
    h = (h ^ ((base >> shift) & 0xff)) * 0x100000001b3ull;
  }
  for (unsigned char c : tag) {
    h = (h ^ c) * 0x100000001b3ull;
  }
  return h;
}

}  // namespace topseg
