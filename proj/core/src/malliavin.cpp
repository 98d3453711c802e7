#include "qerisk/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "qerisk/error.hpp"
#include "qerisk/features.hpp"
#include "qerisk/measure.hpp"

namespace qerisk {

MalliavinField::MalliavinField(double horizon, std::vector<double> brownian,
                               std::vector<std::vector<double>> jump)
    : horizon_(horizon), brownian_(std::move(brownian)), jump_(std::move(jump)) {}

double MalliavinField::brownian(double t, std::size_t path) const {
  return t > horizon_ ? 0.0 : brownian_.at(path);
}

double MalliavinField::jump(double t, std::size_t mark, std::size_t path) const {
  return t > horizon_ ? 0.0 : jump_.at(mark).at(path);
}

MalliavinField malliavin_derivative(const Payoff& xi, const PathBundle& bundle) {
  if (!xi.is_differentiable()) {
    fail(ErrorCode::UnsupportedPayoff,
         "no Malliavin derivative for payoff " + xi.describe());
  }
  const auto x = bundle.terminal_state();
  const auto& model = bundle.model();
  std::vector<double> brownian(x.size());
  for (std::size_t m = 0; m < x.size(); ++m) brownian[m] = xi.derivative(x[m]) * model.sigma;
  std::vector<std::vector<double>> jump(model.mark_count(), std::vector<double>(x.size()));
  for (std::size_t k = 0; k < model.mark_count(); ++k) {
    const double zeta = model.jumps[k].size;
    for (std::size_t m = 0; m < x.size(); ++m) jump[k][m] = xi(x[m] + zeta) - xi(x[m]);
  }
  return MalliavinField(bundle.grid().horizon(), std::move(brownian), std::move(jump));
}

namespace {

void require_positive(std::span<const double> v, std::size_t node, const char* what) {
  for (std::size_t m = 0; m < v.size(); ++m) {
    if (!(v[m] > 0.0)) {
      fail(ErrorCode::EstimatorFailure, std::string("non-positive estimate of ") + what +
                                            " at node " + std::to_string(node) + ", path " +
                                            std::to_string(m));
    }
  }
}

}  // namespace

ClarkOconeResult clark_ocone(const Payoff& xi, const PathBundle& bundle,
                             const RegressionConfig& cfg) {
  const auto field = malliavin_derivative(xi, bundle);
  const std::size_t steps = bundle.grid().steps();
  const std::size_t paths = bundle.path_count();
  const std::size_t marks = bundle.mark_count();
  const double dt = bundle.grid().dt();
  const auto lambda = bundle.model().intensities();
  const auto target = terminal_values(bundle, xi);

  ClarkOconeResult res;
  res.brownian_integrand = PathField(steps, paths);
  res.jump_integrand.assign(marks, PathField(steps, paths));
  if (auto exact = xi.expectation(bundle.model(), bundle.grid().horizon())) {
    res.expectation = *exact;
    res.analytic_expectation = true;
  } else {
    res.expectation = mean(target);
  }

  std::vector<double> integral(paths, 0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    const NodeFeatures features(bundle, i, cfg);
    const ConditionalProjector proj(features.columns(), cfg);
    auto u = res.brownian_integrand.row(i);
    proj.project(field.brownian_values(), u);
    const auto dw = bundle.brownian(i);
    for (std::size_t m = 0; m < paths; ++m) integral[m] += u[m] * dw[m];
    for (std::size_t k = 0; k < marks; ++k) {
      auto v = res.jump_integrand[k].row(i);
      proj.project(field.jump_values(k), v);
      const auto dn = bundle.jumps(k, i);
      const double comp = lambda[k] * dt;
      for (std::size_t m = 0; m < paths; ++m) integral[m] += v[m] * (dn[m] - comp);
    }
  }

  res.reconstruction.resize(paths);
  double err = 0.0, norm = 0.0;
  for (std::size_t m = 0; m < paths; ++m) {
    res.reconstruction[m] = res.expectation + integral[m];
    const double d = res.reconstruction[m] - target[m];
    err += d * d;
    norm += target[m] * target[m];
  }
  res.relative_residual = norm > 0.0 ? std::sqrt(err / norm) : std::sqrt(err);
  res.integral_mean = mean_estimate(integral);
  return res;
}

EntropicControls entropic_controls(double gamma, double beta, const Payoff& xi,
                                   const PathBundle& bundle, const RegressionConfig& cfg) {
  require(gamma > 0.0, "entropic gamma must be positive");
  const auto field = malliavin_derivative(xi, bundle);
  const std::size_t steps = bundle.grid().steps();
  const std::size_t paths = bundle.path_count();
  const std::size_t marks = bundle.mark_count();
  const auto x = bundle.terminal_state();
  const auto& model = bundle.model();

  // Exponents of e^{-gamma beta xi} and of its jump-shifted versions.
  std::vector<double> expo(paths);
  for (std::size_t m = 0; m < paths; ++m) expo[m] = -gamma * beta * xi(x[m]);
  std::vector<std::vector<double>> shifted_expo(marks, std::vector<double>(paths));
  for (std::size_t k = 0; k < marks; ++k) {
    for (std::size_t m = 0; m < paths; ++m) {
      shifted_expo[k][m] = -gamma * beta * xi(x[m] + model.jumps[k].size);
    }
  }

  EntropicControls c;
  c.gamma = gamma;
  c.beta = beta;
  c.z = PathField(steps, paths);
  c.upsilon.assign(marks, PathField(steps, paths));
  c.upsilon_literal.assign(marks, PathField(steps, paths));
  c.gamma_process = PathField(steps + 1, paths);
  for (std::size_t m = 0; m < paths; ++m) c.gamma_process(steps, m) = std::exp(expo[m]);

  std::vector<double> base(paths), target(paths), den(paths), num(paths);
  for (std::size_t i = 0; i < steps; ++i) {
    const NodeFeatures features(bundle, i, cfg);
    const ConditionalProjector proj(features.columns(), cfg);
    // Every conditional expectation below carries the same factor e^{trend},
    // which cancels in the control ratios.
    const auto trend = linear_trend(features.columns(), expo, cfg.ridge);
    for (std::size_t m = 0; m < paths; ++m) base[m] = std::exp(expo[m] - trend[m]);
    proj.project(base, den);
    require_positive(den, i, "Gamma");
    auto g = c.gamma_process.row(i);
    for (std::size_t m = 0; m < paths; ++m) g[m] = std::exp(trend[m]) * den[m];

    for (std::size_t m = 0; m < paths; ++m) target[m] = base[m] * field.brownian_values()[m];
    proj.project(target, num);
    auto z = c.z.row(i);
    for (std::size_t m = 0; m < paths; ++m) z[m] = -beta * num[m] / den[m];

    for (std::size_t k = 0; k < marks; ++k) {
      for (std::size_t m = 0; m < paths; ++m) {
        target[m] = std::exp(shifted_expo[k][m] - trend[m]);
      }
      proj.project(target, num);
      require_positive(num, i, "the jump-shifted Gamma");
      auto u = c.upsilon[k].row(i);
      for (std::size_t m = 0; m < paths; ++m) u[m] = std::log(num[m] / den[m]) / gamma;

      for (std::size_t m = 0; m < paths; ++m) target[m] = base[m] * field.jump_values(k)[m];
      proj.project(target, num);
      auto lit = c.upsilon_literal[k].row(i);
      for (std::size_t m = 0; m < paths; ++m) lit[m] = -beta * num[m] / den[m];
    }
  }

  double sq = 0.0;
  for (std::size_t k = 0; k < marks; ++k) {
    const double d = grid_l2_distance(c.upsilon[k], c.upsilon_literal[k]);
    sq += d * d;
  }
  c.exact_literal_gap = std::sqrt(sq);
  return c;
}

GammaExponentialCheck gamma_exponential_check(const EntropicControls& controls,
                                              const PathBundle& bundle, JumpControlMode mode) {
  const std::size_t steps = bundle.grid().steps();
  const std::size_t paths = bundle.path_count();
  const std::size_t marks = bundle.mark_count();
  require(controls.z.rows() == steps && controls.z.paths() == paths &&
              controls.upsilon.size() == marks,
          "controls do not match the bundle");
  const double gamma = controls.gamma;

  PathField phi_z(steps, paths);
  std::vector<PathField> phi_jump(marks, PathField(steps, paths));
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t m = 0; m < paths; ++m) {
      phi_z(i, m) = gamma * controls.z(i, m);
      for (std::size_t k = 0; k < marks; ++k) {
        phi_jump[k](i, m) = mode == JumpControlMode::Exact
                                ? std::expm1(gamma * controls.upsilon[k](i, m))
                                : gamma * controls.upsilon_literal[k](i, m);
      }
    }
  }
  const auto rn = doleans_dade(bundle, std::move(phi_z), std::move(phi_jump));

  GammaExponentialCheck out;
  out.node_gap.resize(steps + 1);
  std::vector<double> gap(paths);
  for (std::size_t i = 0; i <= steps; ++i) {
    const auto lam = rn.density().row(i);
    const auto g = controls.gamma_process.row(i);
    for (std::size_t m = 0; m < paths; ++m) {
      gap[m] = std::abs(lam[m] - g[m] / controls.gamma_process(0, m));
    }
    out.node_gap[i] = mean(gap);
    out.max_gap = std::max(out.max_gap, out.node_gap[i]);
  }
  return out;
}

double grid_l2_distance(const PathField& a, const PathField& b) {
  require(a.rows() == b.rows() && a.paths() == b.paths(), "grid fields differ in shape");
  std::vector<double> sq(a.values().size());
  for (std::size_t j = 0; j < sq.size(); ++j) {
    const double d = a.values()[j] - b.values()[j];
    sq[j] = d * d;
  }
  return sq.empty() ? 0.0 : std::sqrt(mean(sq));
}

}  // namespace qerisk
