#include "qerisk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "qerisk/error.hpp"
#include "qerisk/features.hpp"

namespace qerisk {

RNProcess::RNProcess(PathField density, PathField phi_z, std::vector<PathField> phi_jump,
                     double kazamaki_margin)
    : density_(std::move(density)),
      phi_z_(std::move(phi_z)),
      phi_jump_(std::move(phi_jump)),
      margin_(kazamaki_margin) {}

RNProcess doleans_dade(const PathBundle& bundle, PathField phi_z,
                       std::vector<PathField> phi_jump) {
  const std::size_t steps = bundle.grid().steps();
  const std::size_t paths = bundle.path_count();
  const std::size_t marks = bundle.mark_count();
  require(phi_z.rows() == steps && phi_z.paths() == paths,
          "Brownian integrand must be steps x paths");
  require(phi_jump.size() == marks, "one jump integrand per mark is required");
  for (const auto& f : phi_jump) {
    require(f.rows() == steps && f.paths() == paths, "jump integrand must be steps x paths");
  }
  const double dt = bundle.grid().dt();
  const auto lambda = bundle.model().intensities();

  double margin = marks == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  for (const auto& f : phi_jump) {
    for (double v : f.values()) margin = std::min(margin, 1.0 + v);
  }

  PathField density(steps + 1, paths, 1.0);
  std::vector<double> log_density(paths, 0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    const auto dw = bundle.brownian(i);
    for (std::size_t m = 0; m < paths; ++m) {
      const double th = phi_z(i, m);
      double step = th * dw[m] - 0.5 * th * th * dt;
      for (std::size_t k = 0; k < marks; ++k) {
        const double phi = phi_jump[k](i, m);
        const int n = bundle.jumps(k, i)[m];
        if (n > 0) {
          if (!(1.0 + phi > 0.0)) {
            fail(ErrorCode::SignedDensityFailure,
                 "jump integrand " + std::to_string(phi) + " <= -1 at step " +
                     std::to_string(i) + ", path " + std::to_string(m) + ", mark " +
                     std::to_string(k));
          }
          step += n * std::log1p(phi);
        }
        step -= phi * lambda[k] * dt;
      }
      log_density[m] += step;
      density(i + 1, m) = std::exp(log_density[m]);
    }
  }
  return RNProcess(std::move(density), std::move(phi_z), std::move(phi_jump), margin);
}

KazamakiReport kazamaki_check(const RNProcess& rn, double delta) {
  require(delta > 0.0 && delta < 1.0, "Kazamaki delta must lie in (0, 1)");
  KazamakiReport r;
  r.worst_margin = rn.kazamaki_margin() - delta;
  r.pass = r.worst_margin >= 0.0;
  return r;
}

std::vector<MartingaleNode> martingale_diagnostic(const RNProcess& rn) {
  const auto& d = rn.density();
  std::vector<MartingaleNode> out(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto e = mean_estimate(d.row(i));
    out[i] = {e.value, e.std_error, std::abs(e.value - 1.0) > 3.0 * e.std_error};
  }
  return out;
}

WeightedExpectation reweighted_expectation(const RNProcess& rn, std::span<const double> payload,
                                           std::size_t node, const PathBundle& bundle,
                                           const RegressionConfig& cfg) {
  require(rn.path_count() == bundle.path_count(), "density and bundle disagree on paths");
  return reweighted_expectation(rn.terminal(), payload, node, bundle, cfg);
}

WeightedExpectation reweighted_expectation(std::span<const double> weights,
                                           std::span<const double> payload, std::size_t node,
                                           const PathBundle& bundle,
                                           const RegressionConfig& cfg) {
  const std::size_t paths = bundle.path_count();
  require(weights.size() == paths && payload.size() == paths,
          "weights and payload must have one entry per path");
  require(node <= bundle.grid().steps(), "node beyond the horizon");
  for (std::size_t m = 0; m < paths; ++m) {
    if (!(weights[m] > 0.0) || !std::isfinite(weights[m])) {
      fail(ErrorCode::EstimatorFailure,
           "density weight not positive on path " + std::to_string(m));
    }
  }

  WeightedExpectation out;
  const auto overall = weighted_mean_estimate(weights, payload);
  if (node == 0) {
    out.path_values.assign(paths, overall.value);
    out.summary = overall;
    return out;
  }

  // Dividing the weights by e^{l(X(t))}, l the trend of log weights, leaves
  // the ratio unchanged and keeps the denominator regression positive.
  const NodeFeatures features(bundle, node, cfg);
  ConditionalProjector projector(features.columns(), cfg);
  std::vector<double> lw(paths);
  for (std::size_t m = 0; m < paths; ++m) lw[m] = std::log(weights[m]);
  const auto trend = linear_trend(features.columns(), lw, cfg.ridge);
  std::vector<double> w(paths), wx(paths);
  for (std::size_t m = 0; m < paths; ++m) {
    w[m] = std::exp(lw[m] - trend[m]);
    wx[m] = w[m] * payload[m];
  }
  const auto num = projector.project(wx);
  const auto den = projector.project(w);
  out.path_values.resize(paths);
  for (std::size_t m = 0; m < paths; ++m) {
    if (!(den[m] > 0.0)) {
      fail(ErrorCode::EstimatorFailure,
           "non-positive density regression at node " + std::to_string(node) + ", path " +
               std::to_string(m));
    }
    out.path_values[m] = num[m] / den[m];
  }
  out.summary = {mean(out.path_values), overall.std_error};
  return out;
}

std::vector<GirsanovNode> girsanov_shift_check(const PathBundle& bundle, const RNProcess& rn) {
  const std::size_t steps = bundle.grid().steps();
  const std::size_t paths = bundle.path_count();
  const std::size_t marks = bundle.mark_count();
  require(rn.steps() == steps && rn.path_count() == paths && rn.mark_count() == marks,
          "density does not match the bundle");
  const double dt = bundle.grid().dt();
  const auto lambda = bundle.model().intensities();

  // E^Q of a step-i quantity only needs the density at t_{i+1}.
  auto within = [](const Estimate& e) {
    return std::abs(e.value) <= 4.0 * e.std_error + 1e-14;
  };
  std::vector<GirsanovNode> out(steps);
  std::vector<double> raw(paths), target(paths), diff(paths);
  for (std::size_t i = 0; i < steps; ++i) {
    const auto w = rn.density().row(i + 1);
    const auto dw = bundle.brownian(i);
    GirsanovNode& node = out[i];
    for (std::size_t m = 0; m < paths; ++m) {
      raw[m] = dw[m];
      target[m] = rn.phi_z()(i, m) * dt;
      diff[m] = raw[m] - target[m];
    }
    node.brownian_shift = weighted_mean_estimate(w, raw).value;
    node.brownian_target = weighted_mean_estimate(w, target).value;
    const auto d = weighted_mean_estimate(w, diff);
    node.brownian_se = d.std_error;
    node.brownian_ok = within(d);

    for (std::size_t k = 0; k < marks; ++k) {
      const auto dn = bundle.jumps(k, i);
      for (std::size_t m = 0; m < paths; ++m) {
        raw[m] = dn[m];
        target[m] = lambda[k] * (1.0 + rn.phi_jump(k)(i, m)) * dt;
        diff[m] = raw[m] - target[m];
      }
      node.jump_mean.push_back(weighted_mean_estimate(w, raw).value);
      node.jump_target.push_back(weighted_mean_estimate(w, target).value);
      const auto dj = weighted_mean_estimate(w, diff);
      node.jump_se.push_back(dj.std_error);
      node.jump_ok.push_back(within(dj));
    }
  }
  return out;
}

}  // namespace qerisk
