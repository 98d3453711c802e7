#include "qerisk/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qerisk/error.hpp"

namespace qerisk {

namespace {

std::vector<double> combine(std::span<const double> a, double s, std::span<const double> b,
                            double t) {
  std::vector<double> out(a.size());
  for (std::size_t m = 0; m < a.size(); ++m) out[m] = s * a[m] + t * b[m];
  return out;
}

std::vector<double> scale(std::span<const double> v, double s) {
  std::vector<double> out(v.size());
  for (std::size_t m = 0; m < v.size(); ++m) out[m] = s * v[m];
  return out;
}

// Per-path influence of the closed-form entropic value at t = 0.
std::vector<double> entropic_influence(double gamma, std::span<const double> position) {
  const double floor = *std::min_element(position.begin(), position.end());
  std::vector<double> e(position.size());
  for (std::size_t m = 0; m < e.size(); ++m) e[m] = std::exp(-gamma * (position[m] - floor));
  const double mu = mean(e);
  for (double& v : e) v /= gamma * mu;
  return e;
}

ConditionalEstimate summarise(std::size_t node, std::vector<double> values) {
  ConditionalEstimate out;
  out.node = node;
  out.summary = mean_estimate(values);
  out.path_values = std::move(values);
  return out;
}

// Lambda(T) / Lambda(t) per path.
std::vector<double> forward_density(const RNProcess& rn, std::size_t node) {
  const auto last = rn.terminal();
  const auto now = rn.density().row(node);
  std::vector<double> out(last.size());
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = last[m] / now[m];
  return out;
}

RNProcess density_from_solution(const RiskEngine& engine, const BsdeSolution& sol) {
  const auto& bundle = engine.bundle();
  const auto& driver = engine.driver();
  const std::size_t steps = sol.steps();
  const std::size_t paths = sol.path_count();
  const std::size_t marks = sol.mark_count();
  PathField phi_z(steps, paths);
  std::vector<PathField> phi_jump(marks, PathField(steps, paths));
  std::vector<double> u(marks), du(marks);
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t m = 0; m < paths; ++m) {
      sol.controls(i, m, u);
      const double z = sol.z()(i, m);
      phi_z(i, m) = driver.dz(z, u);
      driver.jump_partials(z, u, du);
      for (std::size_t k = 0; k < marks; ++k) phi_jump[k](i, m) = du[k];
    }
  }
  return doleans_dade(bundle, std::move(phi_z), std::move(phi_jump));
}

}  // namespace

double default_fd_step(std::span<const double> position) {
  double top = 0.0;
  for (double v : position) top = std::max(top, std::abs(v));
  return 0.05 * (1.0 + top);
}

ConditionalEstimate gradient_fd(const RiskEngine& engine, std::span<const double> xi,
                                std::span<const double> eta, double h, std::size_t node) {
  require(h > 0.0, "finite-difference step must be positive");
  require(xi.size() == eta.size() && xi.size() == engine.bundle().path_count(),
          "xi and eta must have one entry per path");
  require(node <= engine.bundle().grid().steps(), "node beyond the horizon");
  const auto up = combine(xi, 1.0, eta, h);
  const auto down = combine(xi, 1.0, eta, -h);
  const double inv = 1.0 / (2.0 * h);

  if (engine.mode() == RiskMode::EntropicClosedForm) {
    const auto a = engine.evaluate(up, node);
    const auto b = engine.evaluate(down, node);
    auto out = summarise(node, combine(a, inv, b, -inv));
    if (node == 0) {
      const double gamma = engine.driver().alpha();
      const auto ia = entropic_influence(gamma, up);
      const auto ib = entropic_influence(gamma, down);
      out.summary.std_error = mean_estimate(combine(ia, inv, ib, -inv)).std_error;
    }
    return out;
  }

  const auto sa = engine.solve(up);
  const auto sb = engine.solve(down);
  auto out = summarise(node, combine(sa.y().row(node), inv, sb.y().row(node), -inv));
  if (node == 0) {
    out.summary.std_error =
        mean_estimate(combine(sa.pathwise_value(), inv, sb.pathwise_value(), -inv)).std_error;
  }
  return out;
}

MeasureAllocator::MeasureAllocator(const RiskEngine& engine, std::span<const double> xi,
                                   double kazamaki_delta)
    : engine_(&engine), rn_([&] {
        const auto sol = engine.solve(xi);
        return density_from_solution(engine, sol);
      }()),
      risk_(0.0) {
  const auto report = kazamaki_check(rn_, kazamaki_delta);
  if (!report.pass) {
    fail(ErrorCode::SignedDensityFailure,
         "measure-change jump integrands violate 1 + phi >= delta (margin " +
             std::to_string(report.worst_margin) + ")");
  }
  risk_ = engine.initial(xi).value;
}

ConditionalEstimate MeasureAllocator::allocate(std::span<const double> eta,
                                               std::size_t node) const {
  const auto w = reweighted_expectation(rn_, scale(eta, -1.0), node, engine_->bundle(),
                                        engine_->regression());
  return {node, w.path_values, w.summary};
}

ConditionalEstimate gradient_measure(const RiskEngine& engine, std::span<const double> xi,
                                     std::span<const double> eta, std::size_t node) {
  return MeasureAllocator(engine, xi).allocate(eta, node);
}

std::vector<ConditionalEstimate> aumann_shapley(const RiskEngine& engine,
                                                std::span<const double> xi,
                                                std::span<const std::vector<double>> directions,
                                                const AumannShapleyOptions& opts,
                                                std::size_t node) {
  require(opts.nodes >= 1, "Aumann-Shapley needs at least one quadrature node");
  const std::size_t paths = engine.bundle().path_count();
  const auto quad = gauss_legendre_unit(opts.nodes);

  std::vector<ConditionalEstimate> out(directions.size());
  for (auto& e : out) {
    e.node = node;
    e.path_values.assign(paths, 0.0);
  }
  for (std::size_t j = 0; j < quad.nodes.size(); ++j) {
    const double beta = quad.nodes[j];
    const double w = quad.weights[j];
    const auto scaled = scale(xi, beta);
    std::vector<ConditionalEstimate> inner;
    if (opts.inner == InnerGradient::Measure) {
      const MeasureAllocator alloc(engine, scaled);
      for (const auto& eta : directions) inner.push_back(alloc.allocate(eta, node));
    } else {
      const double h = opts.h > 0.0 ? opts.h : default_fd_step(scaled);
      for (const auto& eta : directions) inner.push_back(gradient_fd(engine, scaled, eta, h, node));
    }
    // Node estimates share paths; adding their errors is the conservative bound.
    for (std::size_t d = 0; d < directions.size(); ++d) {
      for (std::size_t m = 0; m < paths; ++m) out[d].path_values[m] += w * inner[d].path_values[m];
      out[d].summary.value += w * inner[d].summary.value;
      out[d].summary.std_error += w * inner[d].summary.std_error;
    }
  }
  return out;
}

ConditionalEstimate aumann_shapley(const RiskEngine& engine, std::span<const double> xi,
                                   std::span<const double> eta, const AumannShapleyOptions& opts,
                                   std::size_t node) {
  const std::vector<std::vector<double>> one{std::vector<double>(eta.begin(), eta.end())};
  return aumann_shapley(engine, xi, one, opts, node).front();
}

ConditionalEstimate convex_representation(const RiskEngine& engine, std::span<const double> xi,
                                          std::size_t quadrature_nodes, std::size_t node) {
  require(quadrature_nodes >= 1, "convex representation needs at least one node");
  require(node <= engine.bundle().grid().steps(), "node beyond the horizon");
  const auto quad = gauss_legendre_unit(quadrature_nodes);
  std::vector<double> mixture(xi.size(), 0.0);
  for (std::size_t j = 0; j < quad.nodes.size(); ++j) {
    const auto sol = engine.solve(scale(xi, quad.nodes[j]));
    const auto rn = density_from_solution(engine, sol);
    const auto ratio = forward_density(rn, node);
    for (std::size_t m = 0; m < mixture.size(); ++m) mixture[m] += quad.weights[j] * ratio[m];
  }
  const auto w = reweighted_expectation(mixture, scale(xi, -1.0), node, engine.bundle(),
                                        engine.regression());
  return {node, w.path_values, w.summary};
}

ConditionalEstimate coherent_representation(const RiskEngine& engine,
                                            std::span<const double> xi, std::size_t node) {
  if (!engine.driver().positively_homogeneous()) {
    fail(ErrorCode::Misuse, "coherent representation needs a positively homogeneous driver");
  }
  require(node <= engine.bundle().grid().steps(), "node beyond the horizon");
  const auto sol = engine.solve(xi);
  const auto rn = density_from_solution(engine, sol);
  const auto w = reweighted_expectation(forward_density(rn, node), scale(xi, -1.0), node,
                                        engine.bundle(), engine.regression());
  return {node, w.path_values, w.summary};
}

AllocationReport allocate_all(const RiskEngine& engine, std::span<const double> xi,
                              std::span<const std::vector<double>> directions,
                              std::span<const std::string> names, double h,
                              const AumannShapleyOptions& as_opts) {
  require(names.size() == directions.size(), "one name per direction is required");
  AllocationReport report;
  report.risk = engine.initial(xi);
  report.fd_step = h > 0.0 ? h : default_fd_step(xi);
  report.quadrature_nodes = as_opts.nodes;
  report.seed = engine.bundle().seed();

  const MeasureAllocator measure(engine, xi);
  const auto as = aumann_shapley(engine, xi, directions, as_opts, 0);
  for (std::size_t d = 0; d < directions.size(); ++d) {
    AllocationRow row;
    row.direction = names[d];
    row.fd = gradient_fd(engine, xi, directions[d], report.fd_step, 0).summary;
    row.measure = measure.allocate(directions[d], 0).summary;
    row.aumann_shapley = as[d].summary;
    row.fd_measure_gap = std::abs(row.fd.value - row.measure.value);
    row.fd_as_gap = std::abs(row.fd.value - row.aumann_shapley.value);
    report.rows.push_back(std::move(row));
  }
  return report;
}

FullAllocationCheck full_allocation_check(const AllocationReport& report, double rho,
                                          AllocationMethod method, double threshold) {
  FullAllocationCheck out;
  double total = 0.0, var = 0.0;
  for (const auto& row : report.rows) {
    const Estimate& e = method == AllocationMethod::FiniteDifference ? row.fd
                        : method == AllocationMethod::Measure       ? row.measure
                                                                     : row.aumann_shapley;
    total += e.value;
    var += e.std_error * e.std_error;
  }
  out.residual = rho - total;
  out.pooled_se = std::sqrt(var);
  out.pass = std::abs(out.residual) <= threshold;
  return out;
}

}  // namespace qerisk
