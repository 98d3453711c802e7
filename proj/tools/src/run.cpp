#include <chrono>
#include <cmath>
#include <ctime>

#include <fmt/format.h>

#include "qerisk/allocation.hpp"
#include "qerisk/error.hpp"
#include "qerisk/malliavin.hpp"
#include "qerisk_tools/scenario.hpp"

#ifndef QERISK_VERSION
#define QERISK_VERSION "unknown"
#endif

namespace qerisk::tools {

Driver build_driver(const ScenarioConfig& cfg) {
  const auto lambda = cfg.model.intensities();
  const auto& d = cfg.driver;
  if (d.family == "entropic") return make_entropic_driver(d.gamma, lambda);
  if (d.family == "qexp") return make_qexp_driver(d.alpha, d.ell, lambda);
  if (d.family == "sublinear") return make_sublinear_driver(d.forms, lambda);
  return make_zero_driver(lambda);
}

namespace {

class Rows {
 public:
  explicit Rows(std::string id) : id_(std::move(id)) {}

  void value(std::string quantity, double v) { rows_.push_back({id_, std::move(quantity), v, {}, {}, {}}); }
  void estimate(std::string quantity, Estimate e) {
    rows_.push_back({id_, std::move(quantity), e.value, e.std_error, {}, {}});
  }
  void check(std::string name, double v, bool pass, std::optional<double> se = {}) {
    rows_.push_back({id_, "check." + name, v, se, name, pass});
  }
  std::vector<ResultRow> take() { return std::move(rows_); }

 private:
  std::string id_;
  std::vector<ResultRow> rows_;
};

// (1/gamma) log E[exp(-gamma (a + b X(T)))] from the cumulant generating function.
std::optional<double> entropic_affine_oracle(const ScenarioConfig& cfg) {
  if (cfg.driver.family != "entropic" || !cfg.payoff) return std::nullopt;
  const auto poly = cfg.payoff->polynomial_form();
  if (!poly) return std::nullopt;
  for (std::size_t j = 2; j < poly->size(); ++j) {
    if ((*poly)[j] != 0.0) return std::nullopt;
  }
  const double a = poly->empty() ? 0.0 : (*poly)[0];
  const double b = poly->size() > 1 ? (*poly)[1] : 0.0;
  const double g = cfg.driver.gamma, T = cfg.horizon, s = -g * b;
  const auto& m = cfg.model;
  double k = s * (m.x0 + m.mu * T) + 0.5 * s * s * m.sigma * m.sigma * T;
  for (const auto& j : m.jumps) k += j.intensity * T * std::expm1(s * j.size);
  return -a + k / g;
}

std::vector<double> shifted(std::span<const double> v, double a, double b) {
  std::vector<double> out(v.size());
  for (std::size_t m = 0; m < v.size(); ++m) out[m] = a * v[m] + b;
  return out;
}

struct Context {
  const ScenarioConfig& cfg;
  std::shared_ptr<const PathBundle> bundle;
  std::optional<RiskEngine> engine;
  std::vector<double> xi;
  std::vector<std::vector<double>> parts;
};

void task_simulate(Context& c, Rows& rows) {
  const auto x = c.bundle->terminal_state();
  const auto mean_est = mean_estimate(x);
  const double mu = c.cfg.model.terminal_mean(c.cfg.horizon);
  const double var = c.cfg.model.terminal_variance(c.cfg.horizon);
  std::vector<double> sq(x.size());
  for (std::size_t m = 0; m < x.size(); ++m) sq[m] = (x[m] - mean_est.value) * (x[m] - mean_est.value);
  auto var_est = mean_estimate(sq);
  var_est.value = sample_variance(x);
  const double k = c.cfg.tolerances.moment_sigmas;
  rows.value("paths", static_cast<double>(c.bundle->path_count()));
  rows.value("steps", static_cast<double>(c.bundle->grid().steps()));
  rows.estimate("x_T.mean", mean_est);
  rows.value("x_T.mean.analytic", mu);
  rows.estimate("x_T.variance", var_est);
  rows.value("x_T.variance.analytic", var);
  rows.value("x_T.min", *std::min_element(x.begin(), x.end()));
  rows.value("x_T.max", *std::max_element(x.begin(), x.end()));
  rows.check("moment.mean", mean_est.value - mu,
             std::abs(mean_est.value - mu) <= k * mean_est.std_error + 1e-12, mean_est.std_error);
  rows.check("moment.variance", var_est.value - var,
             std::abs(var_est.value - var) <= k * var_est.std_error + 1e-12, var_est.std_error);
}

void report_replay(const BsdeSolution& sol, Context& c, Rows& rows) {
  const auto replay = residual_replay(sol, *c.bundle, c.engine->driver());
  long long flagged = 0;
  double worst = 0.0;
  for (const auto& r : replay) {
    flagged += r.flagged;
    if (r.std_error > 0.0) worst = std::max(worst, std::abs(r.mean) / r.std_error);
  }
  rows.value("replay.max_z_score", worst);
  rows.check("replay", static_cast<double>(flagged),
             flagged <= c.cfg.tolerances.replay_max_flagged);
}

void task_solve(Context& c, Rows& rows) {
  const auto& engine = *c.engine;
  const auto sol = solve_bsde(*c.bundle, engine.driver(), c.xi, engine.regression(),
                              engine.solver_options());
  rows.estimate("y0", sol.initial_estimate());
  rows.value("clamp_count", static_cast<double>(sol.clamp_count()));
  double r2 = 1.0, cond = 1.0;
  for (const auto& d : sol.diagnostics()) {
    r2 = std::min(r2, d.r_squared);
    cond = std::max(cond, d.condition);
  }
  rows.value("regression.r_squared.min", r2);
  rows.value("regression.condition.max", cond);
  report_replay(sol, c, rows);
}

void task_risk(Context& c, Rows& rows) {
  const auto& engine = *c.engine;
  const auto& tol = c.cfg.tolerances;
  const auto sol = engine.solve(c.xi);
  const auto rho = sol.initial_estimate();
  rows.estimate("rho0", rho);
  rows.value("clamp_count", static_cast<double>(sol.clamp_count()));
  if (c.cfg.driver.family == "entropic") {
    const double cf = entropic_closed_form(c.cfg.driver.gamma, c.xi, 0, *c.bundle,
                                           engine.regression()).front();
    rows.value("rho0.closed_form", cf);
    rows.check("closed_form", rho.value - cf, std::abs(rho.value - cf) <= tol.closed_form);
  }
  if (auto oracle = entropic_affine_oracle(c.cfg)) {
    rows.value("rho0.oracle", *oracle);
    rows.check("oracle", rho.value - *oracle, std::abs(rho.value - *oracle) <= tol.oracle);
  }
}

void task_allocate(Context& c, Rows& rows) {
  const auto& engine = *c.engine;
  const auto& tol = c.cfg.tolerances;
  AumannShapleyOptions as;
  as.nodes = c.cfg.method.quadrature_nodes;
  as.inner = c.cfg.method.inner_measure ? InnerGradient::Measure : InnerGradient::FiniteDifference;
  as.h = c.cfg.method.h;
  const auto report = allocate_all(engine, c.xi, c.parts, c.cfg.part_names, c.cfg.method.h, as);
  rows.estimate("rho0", report.risk);
  rows.value("fd_step", report.fd_step);
  rows.value("quadrature_nodes", static_cast<double>(report.quadrature_nodes));
  for (const auto& r : report.rows) {
    rows.estimate("alloc.fd." + r.direction, r.fd);
    rows.estimate("alloc.measure." + r.direction, r.measure);
    rows.estimate("alloc.as." + r.direction, r.aumann_shapley);
    const double pooled = std::hypot(r.fd.std_error, r.measure.std_error);
    rows.check("gradient_crosscheck." + r.direction, r.fd_measure_gap,
               r.fd_measure_gap <= std::max(tol.gradient_crosscheck, 4.0 * pooled),
               pooled);
  }
  const auto as_check =
      full_allocation_check(report, report.risk.value, AllocationMethod::AumannShapley,
                            tol.full_allocation);
  rows.check("full_allocation.as", as_check.residual, as_check.pass, as_check.pooled_se);
  if (engine.driver().positively_homogeneous()) {
    const auto g = full_allocation_check(report, report.risk.value, AllocationMethod::Measure,
                                         tol.full_allocation);
    rows.check("full_allocation.gradient", g.residual, g.pass, g.pooled_se);
  }
}

void check_axioms(Context& c, Rows& rows) {
  const auto& tol = c.cfg.tolerances;
  AxiomInputs in;
  in.xi = c.xi;
  in.xi_other = shifted(c.xi, -1.0, 0.0);
  in.dominated = c.xi;
  in.dominating = shifted(c.xi, 1.0, 0.5);
  in.monotonicity_tol = tol.monotonicity;
  in.translation_tol = tol.translation;
  in.convexity_tol = tol.convexity;
  in.homogeneity_tol = tol.homogeneity;
  in.subadditivity_tol = tol.subadditivity;
  for (const auto& r : axiom_suite(*c.engine, in)) {
    rows.check("axiom." + r.axiom, r.residual, r.pass);
  }
}

void check_representations(Context& c, Rows& rows, bool coherent) {
  const auto& engine = *c.engine;
  const double rho = engine.initial(c.xi).value;
  if (coherent) {
    if (!engine.driver().positively_homogeneous()) {
      fail(ErrorCode::ValidationError,
           "verify.checks: coherent_representation needs a sublinear driver");
    }
    const auto rep = coherent_representation(engine, c.xi, 0);
    rows.estimate("rho0.coherent_representation", rep.summary);
    rows.check("coherent_representation", rep.summary.value - rho,
               std::abs(rep.summary.value - rho) <= c.cfg.tolerances.representation);
  } else {
    const auto rep = convex_representation(engine, c.xi, c.cfg.method.convex_nodes, 0);
    rows.estimate("rho0.convex_representation", rep.summary);
    rows.check("convex_representation", rep.summary.value - rho,
               std::abs(rep.summary.value - rho) <= c.cfg.tolerances.representation);
  }
}

void check_clark_ocone(Context& c, Rows& rows) {
  const auto res = clark_ocone(*c.cfg.payoff, *c.bundle, c.engine->regression());
  rows.value("clark_ocone.expectation", res.expectation);
  rows.estimate("clark_ocone.integral_mean", res.integral_mean);
  rows.check("clark_ocone", res.relative_residual,
             res.relative_residual <= c.cfg.tolerances.clark_ocone);
}

void check_gamma_exponential(Context& c, Rows& rows) {
  if (c.cfg.driver.family != "entropic") {
    fail(ErrorCode::ValidationError, "verify.checks: gamma_exponential needs an entropic driver");
  }
  const auto& tol = c.cfg.tolerances;
  const auto ctl = entropic_controls(c.cfg.driver.gamma, 1.0, *c.cfg.payoff, *c.bundle,
                                     c.engine->regression());
  const auto exact = gamma_exponential_check(ctl, *c.bundle, JumpControlMode::Exact);
  rows.check("gamma_exponential", exact.max_gap, exact.max_gap <= tol.gamma_gap);
  if (c.bundle->mark_count() > 0) {
    try {
      rows.value("gamma_exponential.literal_gap",
                 gamma_exponential_check(ctl, *c.bundle, JumpControlMode::Literal).max_gap);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SignedDensityFailure) throw;
      rows.value("gamma_exponential.literal_gap", std::nan(""));
    }
    rows.value("gamma_exponential.exact_literal_l2", ctl.exact_literal_gap);
  }
  const auto sol = c.engine->solve(c.xi);
  double worst = grid_l2_distance(ctl.z, sol.z());
  for (std::size_t k = 0; k < c.bundle->mark_count(); ++k) {
    worst = std::max(worst, grid_l2_distance(ctl.upsilon[k], sol.upsilon(k)));
  }
  rows.check("controls_l2", worst, worst <= tol.controls_l2);
}

void check_driver(Context& c, Rows& rows, bool homogeneity) {
  const auto& driver = c.engine->driver();
  if (homogeneity) {
    const std::vector<double> scales{0.5, 2.0, 5.0};
    const auto rep = check_positive_homogeneity(driver, SampleBox{}, scales, 2000);
    double worst = 0.0;
    for (const auto& r : rep.residuals) worst = std::max(worst, r.max_residual);
    if (driver.positively_homogeneous()) {
      rows.check("homogeneity", worst, rep.pass);
    } else {
      rows.value("homogeneity.max_residual", worst);
    }
    return;
  }
  if (driver.family() == DriverFamily::Sublinear) {
    fail(ErrorCode::ValidationError, "verify.checks: growth_bound needs a qexp or entropic driver");
  }
  GrowthBound bound{driver.alpha(), 0.0, 0.0};
  const auto& ell = driver.linear_part();
  bound.ell = std::abs(ell.offset);
  const auto rep = check_growth_bound(driver, bound, SampleBox{}, 10000);
  const bool linear_free = ell.z_coef == 0.0 &&
                           std::all_of(ell.jump_coefs.begin(), ell.jump_coefs.end(),
                                       [](double b) { return b == 0.0; });
  if (linear_free) {
    rows.check("growth_bound", static_cast<double>(rep.violations), rep.violations == 0);
  } else {
    rows.value("growth_bound.violations", static_cast<double>(rep.violations));
  }
}

void check_martingale(Context& c, Rows& rows) {
  const MeasureAllocator alloc(*c.engine, c.xi);
  const auto diag = martingale_diagnostic(alloc.density());
  const auto& last = diag.back();
  rows.estimate("density.terminal_mean", {last.mean, last.std_error});
  rows.check("martingale", last.mean - 1.0, !last.flagged, last.std_error);
  const auto g = girsanov_shift_check(*c.bundle, alloc.density());
  long long bad = 0;
  for (const auto& n : g) {
    bad += !n.brownian_ok;
    for (bool ok : n.jump_ok) bad += !ok;
  }
  rows.check("girsanov", static_cast<double>(bad), bad == 0);
}

void task_verify(Context& c, Rows& rows) {
  for (const auto& name : c.cfg.checks) {
    if (name == "axioms") check_axioms(c, rows);
    else if (name == "replay") report_replay(c.engine->solve(c.xi), c, rows);
    else if (name == "convex_representation") check_representations(c, rows, false);
    else if (name == "coherent_representation") check_representations(c, rows, true);
    else if (name == "clark_ocone") check_clark_ocone(c, rows);
    else if (name == "gamma_exponential") check_gamma_exponential(c, rows);
    else if (name == "growth_bound") check_driver(c, rows, false);
    else if (name == "homogeneity") check_driver(c, rows, true);
    else if (name == "martingale") check_martingale(c, rows);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg, const std::string& task_override) {
  const std::string task = task_override.empty() ? cfg.task : task_override;
  const auto started = std::chrono::steady_clock::now();
  if (task != "simulate" && (!cfg.payoff || cfg.driver.family.empty())) {
    fail(ErrorCode::ValidationError, "task " + task + " needs driver and payoff blocks");
  }
  if (task == "allocate" && cfg.parts.empty()) {
    fail(ErrorCode::ValidationError, "payoff.decomposition is required for task allocate");
  }

  Context c{cfg, share(simulate_paths(build_grid(cfg.horizon, cfg.steps), cfg.model, cfg.paths,
                                      cfg.seed)),
            std::nullopt, {}, {}};
  if (!cfg.driver.family.empty()) {
    SolverOptions opts{cfg.method.z_max, cfg.method.upsilon_max};
    c.engine.emplace(c.bundle, build_driver(cfg), cfg.method.regression, opts);
  }
  if (cfg.payoff) c.xi = terminal_values(*c.bundle, *cfg.payoff);
  for (const auto& p : cfg.parts) c.parts.push_back(terminal_values(*c.bundle, p));

  Rows rows(cfg.scenario_id);
  if (task == "simulate") task_simulate(c, rows);
  else if (task == "solve") task_solve(c, rows);
  else if (task == "risk") task_risk(c, rows);
  else if (task == "allocate") task_allocate(c, rows);
  else if (task == "verify") task_verify(c, rows);
  else fail(ErrorCode::ValidationError, "unknown task " + task);

  RunReport report;
  report.rows = rows.take();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  report.provenance = Json{{"scenario_id", cfg.scenario_id},
                           {"task", task},
                           {"version", QERISK_VERSION},
                           {"seed", cfg.seed},
                           {"timestamp", utc_timestamp()},
                           {"wall_clock_seconds", seconds},
                           {"config", cfg.document}};
  return report;
}

}  // namespace qerisk::tools
