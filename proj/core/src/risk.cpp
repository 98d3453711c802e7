#include "qerisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <boost/math/tools/roots.hpp>

#include "qerisk/error.hpp"
#include "qerisk/features.hpp"

namespace qerisk {

namespace {

std::vector<double> scaled(std::span<const double> v, double a, double b = 0.0) {
  std::vector<double> out(v.size());
  for (std::size_t m = 0; m < v.size(); ++m) out[m] = a * v[m] + b;
  return out;
}

}  // namespace

RiskEngine::RiskEngine(std::shared_ptr<const PathBundle> bundle, Driver driver,
                       RegressionConfig cfg, SolverOptions opts, RiskMode mode)
    : bundle_(std::move(bundle)),
      driver_(std::move(driver)),
      cfg_(cfg),
      opts_(opts),
      mode_(mode) {
  require(bundle_ != nullptr, "risk engine needs a path bundle");
  require(driver_.mark_count() == bundle_->mark_count(),
          "driver and bundle disagree on the number of jump marks");
  if (mode_ == RiskMode::EntropicClosedForm) {
    require(driver_.family() == DriverFamily::Entropic &&
                driver_.entropic_form() == EntropicForm::Canonical,
            "closed-form mode needs a canonical entropic driver");
  }
}

BsdeSolution RiskEngine::solve(std::span<const double> position) const {
  return solve_bsde(*bundle_, driver_, scaled(position, -1.0), cfg_, opts_);
}

std::vector<double> RiskEngine::evaluate(std::span<const double> position,
                                         std::size_t node) const {
  require(node <= bundle_->grid().steps(), "node beyond the horizon");
  if (mode_ == RiskMode::EntropicClosedForm) {
    return entropic_closed_form(driver_.alpha(), position, node, *bundle_, cfg_);
  }
  const auto sol = solve(position);
  const auto row = sol.y().row(node);
  return {row.begin(), row.end()};
}

Estimate RiskEngine::initial(std::span<const double> position) const {
  if (mode_ == RiskMode::EntropicClosedForm) {
    const double gamma = driver_.alpha();
    const double value = entropic_closed_form(gamma, position, 0, *bundle_, cfg_).front();
    const double floor = *std::min_element(position.begin(), position.end());
    std::vector<double> e(position.size());
    for (std::size_t m = 0; m < e.size(); ++m) e[m] = std::exp(-gamma * (position[m] - floor));
    const auto est = mean_estimate(e);
    return {value, est.std_error / (gamma * est.value)};
  }
  return solve(position).initial_estimate();
}

std::vector<double> dynamic_risk(const RiskEngine& engine, const Payoff& xi, std::size_t node) {
  const auto position = terminal_values(engine.bundle(), xi);
  return engine.evaluate(position, node);
}

std::vector<double> entropic_closed_form(double gamma, std::span<const double> position,
                                         std::size_t node, const PathBundle& bundle,
                                         const RegressionConfig& cfg) {
  require(gamma > 0.0, "entropic gamma must be positive");
  require(position.size() == bundle.path_count(), "position length must equal the path count");
  require(node <= bundle.grid().steps(), "node beyond the horizon");
  const std::size_t paths = position.size();
  if (node == bundle.grid().steps()) return scaled(position, -1.0);

  // Shifting by the smallest outcome keeps every exponent <= 0 and makes
  // constant positions come out exact.
  const double floor = *std::min_element(position.begin(), position.end());
  std::vector<double> a(paths);
  for (std::size_t m = 0; m < paths; ++m) a[m] = -gamma * (position[m] - floor);

  std::vector<double> trend(paths, 0.0), inner(paths);
  if (node == 0) {
    std::vector<double> e(paths);
    for (std::size_t m = 0; m < paths; ++m) e[m] = std::exp(a[m]);
    inner.assign(paths, mean(e));
  } else {
    const NodeFeatures features(bundle, node, cfg);
    trend = linear_trend(features.columns(), a, cfg.ridge);
    std::vector<double> e(paths);
    for (std::size_t m = 0; m < paths; ++m) e[m] = std::exp(a[m] - trend[m]);
    ConditionalProjector(features.columns(), cfg).project(e, inner);
  }

  std::vector<std::size_t> bad;
  for (std::size_t m = 0; m < paths; ++m) {
    if (!(inner[m] > 0.0) || !std::isfinite(inner[m])) bad.push_back(m);
  }
  if (!bad.empty()) {
    std::string msg = "non-positive estimate of E[exp(-gamma xi) | X(t)] on " +
                      std::to_string(bad.size()) + " paths:";
    for (std::size_t j = 0; j < std::min<std::size_t>(bad.size(), 10); ++j) {
      msg += " " + std::to_string(bad[j]);
    }
    fail(ErrorCode::EstimatorFailure, msg);
  }

  std::vector<double> out(paths);
  for (std::size_t m = 0; m < paths; ++m) out[m] = -floor + (trend[m] + std::log(inner[m])) / gamma;
  return out;
}

std::vector<double> entropic_closed_form(double gamma, const Payoff& xi, std::size_t node,
                                         const PathBundle& bundle, const RegressionConfig& cfg) {
  const auto position = terminal_values(bundle, xi);
  return entropic_closed_form(gamma, position, node, bundle, cfg);
}

namespace {

// log mean exp(-gamma xi) and the entropy of the tilted weights, both shifted.
struct Tilt {
  double cumulant = 0.0;
  double entropy = 0.0;
};

Tilt tilt(double gamma, std::span<const double> samples) {
  const std::size_t n = samples.size();
  std::vector<double> a(n);
  for (std::size_t m = 0; m < n; ++m) a[m] = -gamma * samples[m];
  const double shift = *std::max_element(a.begin(), a.end());
  std::vector<double> w(n), wa(n);
  for (std::size_t m = 0; m < n; ++m) {
    w[m] = std::exp(a[m] - shift);
    wa[m] = w[m] * (a[m] - shift);
  }
  const double sw = compensated_sum(w);
  const double nd = static_cast<double>(n);
  Tilt t;
  t.cumulant = shift + std::log(sw / nd);
  // sum p (log p + log n) with p = w / sw.
  t.entropy = compensated_sum(wa) / sw - std::log(sw) + std::log(nd);
  return t;
}

}  // namespace

double entropic_relative_entropy(double gamma, std::span<const double> samples) {
  require(!samples.empty(), "no samples");
  return tilt(gamma, samples).entropy;
}

double entropic_coherent_objective(double c, double gamma, std::span<const double> samples) {
  require(gamma > 0.0 && !samples.empty(), "objective needs gamma > 0 and samples");
  return (c + tilt(gamma, samples).cumulant) / gamma;
}

StaticCoherentResult entropic_coherent_static(double c, std::span<const double> samples) {
  require(c > 0.0 && std::isfinite(c), "entropic level c must be positive");
  require(!samples.empty(), "no samples");
  StaticCoherentResult res;
  if (sample_variance(samples) == 0.0) {
    res.degenerate = true;
    res.rho = -samples.front();
    return res;
  }
  double lo = 1e-6, hi = 1e3;
  auto excess = [&](double g) { return tilt(g, samples).entropy - c; };
  if (excess(lo) > 0.0 || excess(hi) < 0.0) {
    fail(ErrorCode::RootFailure,
         "entropy level c = " + std::to_string(c) + " not bracketed on gamma in [1e-6, 1e3]");
  }
  auto done = [](double a, double b) { return b - a <= 1e-14 * std::max(1.0, a); };
  std::uintmax_t iterations = 400;
  const auto [a, b] = boost::math::tools::bisect(excess, lo, hi, done, iterations);
  res.gamma_c = 0.5 * (a + b);
  res.rho = entropic_coherent_objective(c, res.gamma_c, samples);
  res.entropy = entropic_relative_entropy(res.gamma_c, samples);
  return res;
}

std::vector<AxiomResult> axiom_suite(const RiskEngine& engine, const AxiomInputs& in) {
  const std::size_t paths = engine.bundle().path_count();
  require(in.xi.size() == paths, "axiom inputs: xi has the wrong length");
  auto rho = [&](std::span<const double> v) { return engine.initial(v).value; };
  std::vector<AxiomResult> out;
  auto record = [&](std::string name, double residual, double tol) {
    out.push_back({std::move(name), residual, tol, residual <= tol});
  };

  const double base = rho(in.xi);

  if (engine.mode() == RiskMode::Bsde) {
    const auto sol = engine.solve(in.xi);
    const auto last = sol.y().row(sol.steps());
    double worst = 0.0;
    for (std::size_t m = 0; m < paths; ++m) worst = std::max(worst, std::abs(last[m] + in.xi[m]));
    record("terminal", worst, 0.0);
  }

  if (!in.dominated.empty()) {
    require(in.dominated.size() == paths && in.dominating.size() == paths,
            "axiom inputs: ordered pair has the wrong length");
    for (std::size_t m = 0; m < paths; ++m) {
      require(in.dominated[m] <= in.dominating[m], "axiom inputs: pair is not path-wise ordered");
    }
    record("monotonicity", rho(in.dominating) - rho(in.dominated), in.monotonicity_tol);
  }

  record("translation", std::abs(rho(scaled(in.xi, 1.0, in.cash)) - base + in.cash),
         in.translation_tol);

  if (!in.xi_other.empty()) {
    require(in.xi_other.size() == paths, "axiom inputs: xi_other has the wrong length");
    std::vector<double> mix(paths), sum(paths);
    for (std::size_t m = 0; m < paths; ++m) {
      mix[m] = in.mix * in.xi[m] + (1.0 - in.mix) * in.xi_other[m];
      sum[m] = in.xi[m] + in.xi_other[m];
    }
    const double other = rho(in.xi_other);
    record("convexity", rho(mix) - in.mix * base - (1.0 - in.mix) * other, in.convexity_tol);
    if (engine.driver().positively_homogeneous()) {
      record("subadditivity", rho(sum) - base - other, in.subadditivity_tol);
    }
  }

  if (engine.driver().positively_homogeneous()) {
    record("homogeneity", std::abs(rho(scaled(in.xi, in.scale)) - in.scale * base),
           in.homogeneity_tol);
  }
  return out;
}

}  // namespace qerisk
