#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qerisk/bsde.hpp"
#include "qerisk/error.hpp"
#include "qerisk/malliavin.hpp"
#include "qerisk/market_model.hpp"

using namespace qerisk;

TEST(MalliavinDerivative, IdentityFunctional) {
  const LevyModel model{0.0, 0.0, 1.0, {{-0.2, 1.0}, {0.3, 0.5}}};
  const auto b = simulate_paths(build_grid(1.0, 5), model, 200, 1);
  const auto f = malliavin_derivative(Payoff::affine(0, 1), b);
  for (std::size_t m = 0; m < 200; ++m) {
    EXPECT_EQ(f.brownian(0.3, m), 1.0);
    EXPECT_NEAR(f.jump(0.3, 0, m), -0.2, 1e-15);
    EXPECT_NEAR(f.jump(0.3, 1, m), 0.3, 1e-15);
    EXPECT_EQ(f.brownian(1.5, m), 0.0);
    EXPECT_EQ(f.jump(1.5, 0, m), 0.0);
  }
}

TEST(MalliavinDerivative, NonlinearJumpChainRuleIsExact) {
  const LevyModel model{0.1, 0.0, 0.4, {{-0.2, 1.0}}};
  const auto b = simulate_paths(build_grid(1.0, 5), model, 500, 2);
  const auto xi = Payoff::exp_affine(1.0, 1.0);
  const auto f = malliavin_derivative(xi, b);
  const auto x = b.terminal_state();
  for (std::size_t m = 0; m < 500; ++m) {
    EXPECT_EQ(f.jump(0.0, 0, m), xi(x[m] - 0.2) - xi(x[m]));
    EXPECT_NEAR(f.brownian(0.0, m), 0.4 * std::exp(x[m]), 1e-14 * std::exp(x[m]));
    // Not the linearised e^X zeta.
    EXPECT_GT(std::abs(f.jump(0.0, 0, m) - std::exp(x[m]) * -0.2), 1e-4);
  }
}

TEST(MalliavinDerivative, ConstantAndUnsupported) {
  const LevyModel model{0.0, 0.0, 1.0, {{0.5, 1.0}}};
  const auto b = simulate_paths(build_grid(1.0, 5), model, 100, 3);
  const auto f = malliavin_derivative(Payoff::affine(2.0, 0.0), b);
  for (double v : f.brownian_values()) EXPECT_EQ(v, 0.0);
  for (double v : f.jump_values(0)) EXPECT_EQ(v, 0.0);
  try {
    (void)malliavin_derivative(Payoff::custom([](double x) { return x; }, "id"), b);
    FAIL() << "expected UnsupportedPayoff";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedPayoff);
  }
}

TEST(ClarkOcone, BrownianIsExact) {
  const auto b = simulate_paths(build_grid(1.0, 20), LevyModel{0, 0, 1, {}}, 5000, 4);
  const auto res = clark_ocone(Payoff::affine(0, 1), b);
  EXPECT_LE(res.relative_residual, 1e-10);
  for (double u : res.brownian_integrand.values()) EXPECT_NEAR(u, 1.0, 1e-12);
}

TEST(ClarkOcone, AffineWithJumpsIsExact) {
  const LevyModel model{0.2, 0.1, 0.3, {{-0.2, 1.5}}};
  const auto b = simulate_paths(build_grid(1.0, 20), model, 5000, 5);
  const auto res = clark_ocone(Payoff::affine(0.5, 2.0), b);
  EXPECT_TRUE(res.analytic_expectation);
  EXPECT_LE(res.relative_residual, 1e-10);
  for (double v : res.jump_integrand[0].values()) EXPECT_NEAR(v, -0.4, 1e-12);
}

TEST(ClarkOcone, ClippedExponential) {
  const LevyModel model{1.0, 0.0, 0.3, {}};
  const auto b = simulate_paths(build_grid(1.0, 50), model, 100000, 11);
  const auto xi = Payoff::clipped(Payoff::exp_affine(1.0, 1.0), 0.0, 5.0);
  const auto res = clark_ocone(xi, b, RegressionConfig{3, 1e-8, false});
  EXPECT_FALSE(res.analytic_expectation);
  EXPECT_LE(res.relative_residual, 2e-2);
  EXPECT_LT(std::abs(res.integral_mean.value), 3 * res.integral_mean.std_error);
}

TEST(EntropicControls, ZeroBetaIsTrivial) {
  const LevyModel model{0.0, 0.1, 0.3, {{-0.2, 1.5}}};
  const auto b = simulate_paths(build_grid(1.0, 10), model, 2000, 6);
  const auto c = entropic_controls(2.0, 0.0, Payoff::affine(0, 1), b);
  for (double v : c.z.values()) EXPECT_EQ(v, 0.0);
  for (double v : c.upsilon[0].values()) EXPECT_EQ(v, 0.0);
  const auto g = gamma_exponential_check(c, b);
  EXPECT_EQ(g.max_gap, 0.0);
}

TEST(EntropicControls, GaussianRatioIdentity) {
  // xi = sigma W(T): Z = -beta sigma exactly.
  const double sigma = 0.5, beta = 1.0, gamma = 1.2;
  const auto b = simulate_paths(build_grid(1.0, 20), LevyModel{0, 0, sigma, {}}, 50000, 7);
  const auto c = entropic_controls(gamma, beta, Payoff::affine(0, 1), b);
  for (std::size_t i = 0; i < 20; ++i) {
    double zbar = 0.0;
    for (double z : c.z.row(i)) zbar += z;
    EXPECT_NEAR(zbar / 50000.0, -beta * sigma, 2e-2);
  }
}

TEST(EntropicControls, GammaIsStochasticExponentialBrownian) {
  const LevyModel model{0.0, 0.1, 0.3, {}};
  const auto b = simulate_paths(build_grid(1.0, 50), model, 50000, 8);
  const auto c = entropic_controls(2.0, 1.0, Payoff::affine(0, 1), b);
  EXPECT_LE(gamma_exponential_check(c, b).max_gap, 3e-2);
}

TEST(EntropicControls, JumpsExactBeatsLiteral) {
  const LevyModel model{0.0, 0.1, 0.3, {{-0.2, 1.5}}};
  const auto b = simulate_paths(build_grid(1.0, 50), model, 50000, 9);
  const auto c = entropic_controls(2.0, 1.0, Payoff::affine(0, 1), b);
  const double exact = gamma_exponential_check(c, b, JumpControlMode::Exact).max_gap;
  const double literal = gamma_exponential_check(c, b, JumpControlMode::Literal).max_gap;
  EXPECT_LE(exact, 5e-2);
  EXPECT_GT(literal, exact);
}

TEST(EntropicControls, MatchSolverControls) {
  const LevyModel model{0.0, 0.1, 0.3, {{-0.2, 1.5}}};
  const auto b = simulate_paths(build_grid(1.0, 25), model, 50000, 10);
  const double gamma = 2.0;
  const auto c = entropic_controls(gamma, 1.0, Payoff::affine(0, 1), b);
  const auto sol = solve_bsde(b, make_entropic_driver(gamma, model.intensities()),
                              terminal_values(b, Payoff::affine(0, -1)));
  EXPECT_LE(grid_l2_distance(c.z, sol.z()), 3e-2);
  EXPECT_LE(grid_l2_distance(c.upsilon[0], sol.upsilon(0)), 3e-2);
}

TEST(GridL2, Definition) {
  PathField a(2, 2, 0.0), b(2, 2, 0.0);
  b(0, 0) = 2.0;
  EXPECT_DOUBLE_EQ(grid_l2_distance(a, b), 1.0);
  EXPECT_THROW((void)grid_l2_distance(a, PathField(3, 2)), Error);
}
