#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "topseg/losses.hpp"

using namespace topseg;

TEST_CASE("cross entropy at fixed points", "[losses]") {
  CHECK(std::abs(ce_loss(0.5, 1) - 0.693147) < 1e-6);
  CHECK(ce_loss(1.0, 1) <= 1e-6);  // clamped perfect prediction
  CHECK(std::abs(ce_loss(0.9, 0) - 2.302585) < 1e-5);
  CHECK(ce_loss(0.0, 0) <= 1e-6);
}

TEST_CASE("weighted cross entropy at fixed points", "[losses]") {
  CHECK(std::abs(weighted_ce_loss(0.5, 1, 0.2, 0.8) - 0.554518) < 1e-5);
  // equal half weights scale plain CE exactly
  for (double p : {0.05, 0.3, 0.6, 0.95}) {
    for (int y : {0, 1}) {
      CHECK(std::abs(weighted_ce_loss(p, y, 0.5, 0.5) - 0.5 * ce_loss(p, y)) <
            1e-12);
    }
  }
}

TEST_CASE("focal loss at fixed points", "[losses]") {
  CHECK(std::abs(focal_loss(0.5, 1, 0.8, 2.0) - 0.138629) < 1e-5);
  CHECK(std::abs(focal_loss(0.9, 0, 0.8, 2.0) - 0.373019) < 1e-5);
}

TEST_CASE("loss parameter validation", "[losses]") {
  CHECK_THROWS_AS(LossSpec::weighted_ce(0.2, 1.5).validate(), Error);
  CHECK_THROWS_AS(LossSpec::weighted_ce(-0.1, 0.5).validate(), Error);
  CHECK_THROWS_AS(LossSpec::focal(1.2, 2.0).validate(), Error);
  CHECK_THROWS_AS(LossSpec::focal(0.5, -1.0).validate(), Error);
  CHECK_NOTHROW(LossSpec::focal(0.0, 0.0).validate());
  CHECK_NOTHROW(LossSpec::weighted_ce(0.0, 1.0).validate());
  CHECK_THROWS_AS(weighted_ce_loss(0.5, 1, 0.2, 1.5), Error);
  CHECK_THROWS_AS(focal_loss(0.5, 1, 0.8, -2.0), Error);
  CHECK_THROWS_AS(ce_loss(0.5, 2), Error);
}

TEST_CASE("focal with gamma zero equals weighted cross entropy", "[losses]") {
  for (double alpha : {0.1, 0.5, 0.8}) {
    for (int i = 1; i <= 99; ++i) {
      const double p = i / 100.0;
      for (int y : {0, 1}) {
        const double f = focal_loss(p, y, alpha, 0.0);
        const double w = weighted_ce_loss(p, y, 1.0 - alpha, alpha);
        CHECK(std::abs(f - w) < 1e-7);
      }
    }
  }
}

TEST_CASE("losses decrease in p for a positive label", "[losses]") {
  const LossSpec specs[] = {LossSpec::ce(), LossSpec::weighted_ce(0.2, 0.8),
                            LossSpec::focal(0.8, 2.0)};
  for (const auto& spec : specs) {
    double prev = loss_value(spec, 0.01, 1);
    for (int i = 2; i <= 99; ++i) {
      const double cur = loss_value(spec, i / 100.0, 1);
      CHECK(cur < prev);
      prev = cur;
    }
    CHECK(loss_value(spec, 0.999999, 1) < 1e-4);
  }
}

TEST_CASE("focal loss never exceeds alpha-scaled cross entropy", "[losses]") {
  for (double gamma : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    for (int i = 1; i <= 99; ++i) {
      const double p = i / 100.0;
      CHECK(focal_loss(p, 1, 0.8, gamma) <= 0.8 * ce_loss(p, 1) + 1e-12);
    }
  }
}

TEST_CASE("losses stay finite and nonnegative across the unit interval",
          "[losses]") {
  const LossSpec specs[] = {LossSpec::ce(), LossSpec::weighted_ce(0.3, 0.7),
                            LossSpec::focal(0.25, 3.0)};
  for (const auto& spec : specs) {
    for (double p : {0.0, 1e-9, 0.5, 1.0 - 1e-9, 1.0}) {
      for (int y : {0, 1}) {
        const double v = loss_value(spec, p, y);
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
      }
    }
  }
}

TEST_CASE("analytic loss gradients match finite differences", "[losses]") {
  const LossSpec specs[] = {LossSpec::ce(), LossSpec::weighted_ce(0.2, 0.8),
                            LossSpec::focal(0.8, 2.0),
                            LossSpec::focal(0.5, 0.0)};
  const double h = 1e-6;
  for (const auto& spec : specs) {
    for (int i = 1; i <= 19; ++i) {
      const double p = i / 20.0;  // away from clamp boundaries
      for (int y : {0, 1}) {
        const double numeric =
            (loss_value(spec, p + h, y) - loss_value(spec, p - h, y)) /
            (2.0 * h);
        const double analytic = loss_dp(spec, p, y);
        CHECK(std::abs(analytic - numeric) /
                  std::max({1.0, std::abs(analytic), std::abs(numeric)}) <
              1e-4);
      }
    }
  }
}

TEST_CASE("loss gradient is zero at the clamp boundary", "[losses]") {
  CHECK(loss_dp(LossSpec::ce(), 0.0, 1) == 0.0);
  CHECK(loss_dp(LossSpec::ce(), 1.0, 0) == 0.0);
  CHECK(loss_dp(LossSpec::focal(0.8, 2.0), 0.0, 1) == 0.0);
}

TEST_CASE("batch loss is the mean of per-example losses", "[losses]") {
  // losses 0.2 and 0.4 average to 0.3
  const float p1 = std::exp(-0.2f);
  const float p2 = std::exp(-0.4f);
  const double got = batch_loss({p1, p2}, {1, 1}, LossSpec::ce());
  CHECK(std::abs(got - 0.3) < 1e-6);

  CHECK(batch_loss({1.0f, 0.0f}, {1, 0}, LossSpec::ce()) <= 1e-6);
  CHECK_THROWS_AS(batch_loss({}, {}, LossSpec::ce()), Error);
  CHECK_THROWS_AS(batch_loss({0.5f}, {1, 0}, LossSpec::ce()), Error);
}
