#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "topseg/common.hpp"

namespace topseg {

// Probabilities are clamped into [kProbEps, 1-kProbEps] before any log.
inline constexpr double kProbEps = 1e-7;

enum class LossKind { kCe, kWeightedCe, kFocal };

struct LossSpec {
  LossKind kind = LossKind::kCe;
  double w0 = 1.0, w1 = 1.0;      // weighted_ce
  double alpha = 0.5, gamma = 0;  // focal

  static LossSpec ce() { return {}; }
  static LossSpec weighted_ce(double w0, double w1) {
    LossSpec s;
    s.kind = LossKind::kWeightedCe;
    s.w0 = w0;
    s.w1 = w1;
    return s;
  }
  static LossSpec focal(double alpha, double gamma) {
    LossSpec s;
    s.kind = LossKind::kFocal;
    s.alpha = alpha;
    s.gamma = gamma;
    return s;
  }

  void validate() const {
    if (kind == LossKind::kWeightedCe) {
      require(w0 >= 0.0 && w0 <= 1.0 && w1 >= 0.0 && w1 <= 1.0,
              "weighted_ce: weights must lie in [0,1], got w0=", w0,
              " w1=", w1);
    } else if (kind == LossKind::kFocal) {
      require(alpha >= 0.0 && alpha <= 1.0,
              "focal: alpha must lie in [0,1], got ", alpha);
      require(gamma >= 0.0, "focal: gamma must be >= 0, got ", gamma);
    }
  }

  std::string name() const {
    switch (kind) {
      case LossKind::kCe:
        return "ce";
      case LossKind::kWeightedCe:
        return "weighted_ce";
      case LossKind::kFocal:
        return "focal";
    }
    return "?";
  }
};

inline double clamp_prob(double p) {
  return std::min(1.0 - kProbEps, std::max(kProbEps, p));
}

inline void check_label(int y) {
  require(y == 0 || y == 1, "loss: label must be 0 or 1, got ", y);
}

inline double ce_loss(double p, int y) {
  check_label(y);
  double pc = clamp_prob(p);
  return y == 1 ? -std::log(pc) : -std::log(1.0 - pc);
}

inline double weighted_ce_loss(double p, int y, double w0, double w1) {
  check_label(y);
  require(w0 >= 0.0 && w0 <= 1.0 && w1 >= 0.0 && w1 <= 1.0,
          "weighted_ce: weights must lie in [0,1], got w0=", w0, " w1=", w1);
  double pc = clamp_prob(p);
  return y == 1 ? -w1 * std::log(pc) : -w0 * std::log(1.0 - pc);
}

// Down-weights well-classified examples by (1-p_t)^gamma; alpha re-balances
// the positive class. gamma = 0 reduces to weighted CE with (w1, w0) =
// (alpha, 1-alpha).
inline double focal_loss(double p, int y, double alpha, double gamma) {
  check_label(y);
  require(alpha >= 0.0 && alpha <= 1.0, "focal: alpha must lie in [0,1], got ",
          alpha);
  require(gamma >= 0.0, "focal: gamma must be >= 0, got ", gamma);
  double pc = clamp_prob(p);
  if (y == 1) return -alpha * std::pow(1.0 - pc, gamma) * std::log(pc);
  return -(1.0 - alpha) * std::pow(pc, gamma) * std::log(1.0 - pc);
}

inline double loss_value(const LossSpec& s, double p, int y) {
  switch (s.kind) {
    case LossKind::kCe:
      return ce_loss(p, y);
    case LossKind::kWeightedCe:
      return weighted_ce_loss(p, y, s.w0, s.w1);
    case LossKind::kFocal:
      return focal_loss(p, y, s.alpha, s.gamma);
  }
  throw Error("loss_value: bad kind");
}

// d(loss)/dp. Zero where the clamp is active: the clamped value is constant
// there.
inline double loss_dp(const LossSpec& s, double p, int y) {
  check_label(y);
  s.validate();
  if (p < kProbEps || p > 1.0 - kProbEps) return 0.0;
  double pc = clamp_prob(p);
  switch (s.kind) {
    case LossKind::kCe:
      return y == 1 ? -1.0 / pc : 1.0 / (1.0 - pc);
    case LossKind::kWeightedCe:
      return y == 1 ? -s.w1 / pc : s.w0 / (1.0 - pc);
    case LossKind::kFocal: {
      double a = s.alpha, g = s.gamma;
      if (y == 1) {
        double q = 1.0 - pc;
        // L = -a q^g log p
        return a * g * std::pow(q, g - 1.0) * std::log(pc) -
               a * std::pow(q, g) / pc;
      }
      // L = -(1-a) p^g log(1-p)
      return -(1.0 - a) * (g * std::pow(pc, g - 1.0) * std::log(1.0 - pc) -
                           std::pow(pc, g) / (1.0 - pc));
    }
  }
  throw Error("loss_dp: bad kind");
}

// Mean per-example loss over the batch.
inline double batch_loss(const std::vector<float>& probs,
                         const std::vector<int>& labels, const LossSpec& s) {
  require(!probs.empty(), "batch_loss: empty batch");
  require(probs.size() == labels.size(), "batch_loss: ", probs.size(),
          " probabilities vs ", labels.size(), " labels");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    sum += loss_value(s, double(probs[i]), labels[i]);
  }
  return sum / double(probs.size());
}

}  // namespace topseg
