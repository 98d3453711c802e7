#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qerisk/error.hpp"
#include "qerisk/market_model.hpp"
#include "qerisk/measure.hpp"

using namespace qerisk;

namespace {

PathBundle brownian(long long paths, std::uint64_t seed, long long steps = 50) {
  return simulate_paths(build_grid(1.0, steps), LevyModel{0.0, 0.0, 1.0, {}}, paths, seed);
}

RNProcess constant_density(const PathBundle& b, double theta, std::vector<double> phi = {}) {
  const std::size_t n = b.grid().steps(), m = b.path_count();
  std::vector<PathField> jumps;
  for (double p : phi) jumps.emplace_back(n, m, p);
  return doleans_dade(b, PathField(n, m, theta), std::move(jumps));
}

}  // namespace

TEST(DoleansDade, ZeroIntegrandsGiveOne) {
  const auto b = simulate_paths(build_grid(1.0, 10), LevyModel{0, 0, 1, {{0.3, 2.0}}}, 500, 1);
  const auto rn = constant_density(b, 0.0, {0.0});
  for (double v : rn.density().values()) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(rn.kazamaki_margin(), 1.0);
}

TEST(DoleansDade, BrownianClosedForm) {
  const auto b = brownian(2000, 2);
  const double theta = 0.7;
  const auto rn = constant_density(b, theta);
  const auto w = b.terminal_state();
  for (std::size_t m = 0; m < 2000; ++m) {
    const double exact = std::exp(theta * w[m] - 0.5 * theta * theta);
    EXPECT_NEAR(rn.terminal()[m], exact, 1e-12 * exact);
  }
  for (std::size_t m = 0; m < 2000; ++m) EXPECT_EQ(rn.density()(0, m), 1.0);
}

TEST(DoleansDade, PoissonClosedForm) {
  const double lambda = 1.3;
  const auto b = simulate_paths(build_grid(1.0, 20), LevyModel{0, 0, 0, {{1.0, lambda}}}, 3000, 3);
  const auto rn = constant_density(b, 0.0, {0.5});
  const auto counts = b.cumulative_jumps(0, 20);
  for (std::size_t m = 0; m < 3000; ++m) {
    const double exact = std::pow(1.5, counts[m]) * std::exp(-0.5 * lambda);
    EXPECT_NEAR(rn.terminal()[m], exact, 1e-12 * exact);
  }
}

TEST(DoleansDade, SignedDensityFails) {
  const auto b = simulate_paths(build_grid(1.0, 20), LevyModel{0, 0, 0, {{1.0, 3.0}}}, 200, 4);
  try {
    (void)constant_density(b, 0.0, {-1.0});
    FAIL() << "expected SignedDensityFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SignedDensityFailure);
  }
}

TEST(Kazamaki, Examples) {
  const auto b = simulate_paths(build_grid(1.0, 10), LevyModel{0, 0, 1, {{0.3, 0.01}}}, 100, 5);
  const auto zero = constant_density(b, 0.0, {0.0});
  const auto k0 = kazamaki_check(zero, 0.1);
  EXPECT_TRUE(k0.pass);
  EXPECT_NEAR(k0.worst_margin, 0.9, 1e-15);

  const double gamma = 0.8;
  const auto bounded = constant_density(b, 0.0, {std::exp(-5.0 * gamma) - 1.0});
  EXPECT_TRUE(kazamaki_check(bounded, 0.9 * std::exp(-5.0 * gamma)).pass);
  EXPECT_THROW((void)kazamaki_check(zero, 0.0), Error);
}

TEST(Kazamaki, BoundaryIntegrandFails) {
  // phi = -1 is allowed by doleans_dade on paths without jumps; pick a model
  // whose sample has no jumps at all.
  const auto b = simulate_paths(build_grid(1.0, 5), LevyModel{0, 0, 1, {{0.3, 1e-9}}}, 50, 6);
  const auto rn = constant_density(b, 0.0, {-1.0});
  const auto k = kazamaki_check(rn, 0.2);
  EXPECT_FALSE(k.pass);
  EXPECT_NEAR(k.worst_margin, -0.2, 1e-15);
}

TEST(Martingale, ZeroIntegrand) {
  const auto b = brownian(100, 7, 10);
  for (const auto& n : martingale_diagnostic(constant_density(b, 0.0))) {
    EXPECT_EQ(n.mean, 1.0);
    EXPECT_EQ(n.std_error, 0.0);
    EXPECT_FALSE(n.flagged);
  }
}

TEST(Martingale, BoundedBrownianIntegrand) {
  const auto b = brownian(100000, 8);
  for (const auto& n : martingale_diagnostic(constant_density(b, 0.5))) {
    EXPECT_FALSE(n.flagged);
  }
}

TEST(Martingale, HeavyIntegrandReportsWideErrors) {
  const auto b = brownian(1000, 9);
  const auto diag = martingale_diagnostic(constant_density(b, 3.0));
  // True sd of Lambda(T) is sqrt(e^9 - 1) ~ 90; the sample sees far less, but
  // the reported error still dwarfs that of a mild integrand.
  const auto mild = martingale_diagnostic(constant_density(b, 0.5));
  EXPECT_GT(diag.back().std_error, 10.0 * mild.back().std_error);
}

TEST(Reweighting, UnitDensityIsPlainMean) {
  const auto b = brownian(5000, 10, 10);
  const auto rn = constant_density(b, 0.0);
  const auto x = b.terminal_state();
  const auto w = reweighted_expectation(rn, x, 0, b);
  const auto plain = mean_estimate(x);
  EXPECT_EQ(w.summary.value, plain.value);
}

TEST(Reweighting, ConstantPayloadIsExact) {
  const auto b = brownian(5000, 11, 10);
  const auto rn = constant_density(b, 0.9);
  const std::vector<double> c(5000, 2.5);
  EXPECT_NEAR(reweighted_expectation(rn, c, 0, b).summary.value, 2.5, 1e-14);
  for (double v : reweighted_expectation(rn, c, 5, b).path_values) EXPECT_NEAR(v, 2.5, 1e-12);
}

TEST(Reweighting, GirsanovMeanShift) {
  const double theta = 0.5;
  const auto b = brownian(100000, 12);
  const auto rn = constant_density(b, theta);
  const auto est = reweighted_expectation(rn, b.terminal_state(), 0, b).summary;
  EXPECT_LT(std::abs(est.value - theta), 3 * est.std_error);
}

TEST(Reweighting, ZeroDenominatorIsEstimatorFailure) {
  const auto b = brownian(100, 13, 5);
  const std::vector<double> w(100, 0.0), x(100, 1.0);
  try {
    (void)reweighted_expectation(w, x, 0, b);
    FAIL() << "expected EstimatorFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EstimatorFailure);
  }
}

TEST(Girsanov, BrownianDrift) {
  const auto b = brownian(100000, 14);
  const auto checks = girsanov_shift_check(b, constant_density(b, 0.4));
  for (const auto& n : checks) {
    EXPECT_NEAR(n.brownian_target, 0.008, 1e-15);
    EXPECT_TRUE(n.brownian_ok);
    EXPECT_LT(std::abs(n.brownian_shift - 0.008), 4 * n.brownian_se + 1e-14);
  }
}

TEST(Girsanov, IntensityScaling) {
  const auto b = simulate_paths(build_grid(1.0, 50), LevyModel{0, 0, 0, {{0.5, 2.0}}}, 100000, 15);
  const auto checks = girsanov_shift_check(b, constant_density(b, 0.0, {1.0}));
  for (const auto& n : checks) {
    EXPECT_NEAR(n.jump_target[0], 0.08, 1e-12);
    EXPECT_TRUE(n.jump_ok[0]);
  }
}

TEST(Girsanov, ZeroIntegrandsZeroShift) {
  const auto b = simulate_paths(build_grid(1.0, 10), LevyModel{0, 0, 1, {{0.5, 2.0}}}, 1000, 16);
  for (const auto& n : girsanov_shift_check(b, constant_density(b, 0.0, {0.0}))) {
    EXPECT_EQ(n.brownian_target, 0.0);
    EXPECT_TRUE(n.brownian_ok);
    EXPECT_NEAR(n.jump_target[0], 2.0 * 0.1, 1e-15);
    EXPECT_TRUE(n.jump_ok[0]);
  }
}
