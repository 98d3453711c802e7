#include "qerisk/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qerisk/error.hpp"
#include "qerisk/features.hpp"

namespace qerisk {

BsdeSolution::BsdeSolution(std::size_t steps, std::size_t marks, std::size_t paths)
    : y_(steps + 1, paths), z_(steps, paths), upsilon_(marks, PathField(steps, paths)) {}

Estimate BsdeSolution::initial_estimate() const {
  Estimate e = mean_estimate(pathwise_);
  e.value = initial_value();
  return e;
}

void BsdeSolution::controls(std::size_t step, std::size_t path, std::span<double> u) const {
  for (std::size_t k = 0; k < upsilon_.size(); ++k) u[k] = upsilon_[k](step, path);
}

BsdeSolution solve_bsde(const PathBundle& bundle, const Driver& driver,
                        std::span<const double> terminal, const RegressionConfig& cfg,
                        const SolverOptions& opts) {
  const std::size_t paths = bundle.path_count();
  const std::size_t steps = bundle.grid().steps();
  const std::size_t marks = bundle.mark_count();
  require(terminal.size() == paths, "terminal vector length must equal the path count");
  require(driver.mark_count() == marks, "driver and bundle disagree on the number of jump marks");
  for (std::size_t m = 0; m < paths; ++m) {
    if (!std::isfinite(terminal[m])) {
      throw SolverError(steps, "non-finite terminal value on path " + std::to_string(m));
    }
  }

  const double dt = bundle.grid().dt();
  const auto lambda = driver.intensities();
  BsdeSolution sol(steps, marks, paths);
  sol.diagnostics_.resize(steps);
  std::copy(terminal.begin(), terminal.end(), sol.y_.row(steps).begin());

  std::vector<double> fitted(paths), residual(paths), target(paths), proj(paths);
  std::vector<double> u(marks);

  for (std::size_t i = steps; i-- > 0;) {
    const auto next = sol.y_.row(i + 1);
    const auto dw = bundle.brownian(i);

    // At i = 0 the state is constant, so the projector reduces to a plain mean.
    const NodeFeatures features(bundle, i, cfg);

    try {
      ConditionalProjector projector(features.columns(), cfg);
      projector.project(next, fitted);
      sol.diagnostics_[i] = {r_squared(next, fitted), projector.condition(),
                             projector.basis_size()};
      for (std::size_t m = 0; m < paths; ++m) residual[m] = next[m] - fitted[m];

      for (std::size_t m = 0; m < paths; ++m) target[m] = residual[m] * dw[m];
      projector.project(target, proj);
      auto zrow = sol.z_.row(i);
      for (std::size_t m = 0; m < paths; ++m) zrow[m] = proj[m] / dt;

      for (std::size_t k = 0; k < marks; ++k) {
        const auto dn = bundle.jumps(k, i);
        const double comp = lambda[k] * dt;
        for (std::size_t m = 0; m < paths; ++m) target[m] = residual[m] * (dn[m] - comp);
        projector.project(target, proj);
        auto urow = sol.upsilon_[k].row(i);
        for (std::size_t m = 0; m < paths; ++m) urow[m] = proj[m] / comp;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SolverFailure) throw SolverError(i, e.what());
      throw;
    }

    auto zrow = sol.z_.row(i);
    auto yrow = sol.y_.row(i);
    for (std::size_t m = 0; m < paths; ++m) {
      double& z = zrow[m];
      if (std::abs(z) > opts.z_max) {
        z = std::clamp(z, -opts.z_max, opts.z_max);
        ++sol.clamps_;
      }
      for (std::size_t k = 0; k < marks; ++k) {
        double& uk = sol.upsilon_[k](i, m);
        if (std::abs(uk) > opts.upsilon_max) {
          uk = std::clamp(uk, -opts.upsilon_max, opts.upsilon_max);
          ++sol.clamps_;
        }
        u[k] = uk;
      }
      const double y = fitted[m] + driver.value(z, u) * dt;
      if (!std::isfinite(y)) {
        throw SolverError(i, "non-finite Y at step " + std::to_string(i) + " on path " +
                                 std::to_string(m));
      }
      yrow[m] = y;
    }
  }

  sol.pathwise_.assign(terminal.begin(), terminal.end());
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t m = 0; m < paths; ++m) {
      sol.controls(i, m, u);
      sol.pathwise_[m] += driver.value(sol.z_(i, m), u) * dt;
    }
  }
  return sol;
}

std::vector<ReplayStep> residual_replay(const BsdeSolution& solution, const PathBundle& bundle,
                                        const Driver& driver) {
  const std::size_t paths = bundle.path_count();
  const std::size_t steps = bundle.grid().steps();
  const std::size_t marks = bundle.mark_count();
  require(solution.steps() == steps && solution.path_count() == paths,
          "solution does not match the bundle");
  const double dt = bundle.grid().dt();
  const auto lambda = driver.intensities();

  std::vector<ReplayStep> out(steps);
  std::vector<double> increment(paths), integral(paths), residual(paths), u(marks);
  for (std::size_t i = 0; i < steps; ++i) {
    const auto dw = bundle.brownian(i);
    for (std::size_t m = 0; m < paths; ++m) {
      solution.controls(i, m, u);
      const double z = solution.z()(i, m);
      increment[m] = solution.y()(i + 1, m) - solution.y()(i, m) + driver.value(z, u) * dt;
      double mart = z * dw[m];
      for (std::size_t k = 0; k < marks; ++k) {
        mart += u[k] * (bundle.jumps(k, i)[m] - lambda[k] * dt);
      }
      integral[m] = mart;
      residual[m] = increment[m] - mart;
    }
    const double n = static_cast<double>(paths);
    const double se = std::sqrt((sample_variance(increment) + sample_variance(integral)) / n);
    const double mu = mean(residual);
    out[i] = {mu, se, std::abs(mu) > 3.0 * se};
  }
  return out;
}

}  // namespace qerisk
