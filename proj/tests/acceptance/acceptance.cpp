// Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qerisk/allocation.hpp"
#include "qerisk/error.hpp"
#include "qerisk/malliavin.hpp"
#include "qerisk/measure.hpp"
#include "qerisk/risk.hpp"
#include "qerisk_tools/scenario.hpp"

namespace fs = std::filesystem;
using namespace qerisk;
using namespace qerisk::tools;

namespace {

const fs::path kConfigs = QERISK_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Scenario pieces built from a shipped config. Bundles are shared between
// scenarios with the same model, grid and sample.
struct Desk {
  ScenarioConfig cfg;
  std::shared_ptr<const PathBundle> bundle;
  std::unique_ptr<RiskEngine> engine;
  std::vector<double> xi;
  std::vector<std::vector<double>> parts;
};

std::map<std::string, std::shared_ptr<const PathBundle>> bundle_cache;
std::map<std::string, std::shared_ptr<Desk>> desk_cache;

std::shared_ptr<Desk> desk(const std::string& name) {
  if (auto it = desk_cache.find(name); it != desk_cache.end()) return it->second;
  auto d = std::make_shared<Desk>();
  d->cfg = validate_config(load_config(kConfigs / (name + ".json")));
  const auto& doc = d->cfg.document;
  const std::string key = doc["model"].dump() + doc["grid"].dump() + doc["mc"].dump();
  auto& cached = bundle_cache[key];
  if (!cached) {
    cached = share(simulate_paths(build_grid(d->cfg.horizon, d->cfg.steps), d->cfg.model,
                                  d->cfg.paths, d->cfg.seed));
  }
  d->bundle = cached;
  d->engine = std::make_unique<RiskEngine>(
      d->bundle, build_driver(d->cfg), d->cfg.method.regression,
      SolverOptions{d->cfg.method.z_max, d->cfg.method.upsilon_max});
  d->xi = terminal_values(*d->bundle, *d->cfg.payoff);
  for (const auto& p : d->cfg.parts) d->parts.push_back(terminal_values(*d->bundle, p));
  desk_cache[name] = d;
  return d;
}

// -mu T + gamma sigma^2 T / 2 + (T / gamma) sum_k lambda_k (e^{-gamma zeta_k} - 1)
double entropic_oracle(const ScenarioConfig& cfg) {
  const double g = cfg.driver.gamma, T = cfg.horizon;
  const auto& m = cfg.model;
  double v = -(m.x0 + m.mu * T) + g * m.sigma * m.sigma * T / 2.0;
  for (const auto& j : m.jumps) v += j.intensity * T / g * (std::exp(-g * j.size) - 1.0);
  return v;
}

std::vector<double> scaled(std::span<const double> v, double beta) {
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x *= beta;
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

Outcome closed_form_brownian() {
  const auto d = desk("entropic_desk");
  const double oracle = entropic_oracle(d->cfg);
  const auto y0 = d->engine->initial(d->xi);
  const double gap = std::abs(y0.value - oracle);
  return {gap <= 5e-3, fmt::format("Y0 {:.6f} (se {:.1e}) vs {:.6f}, gap {:.2e} <= 5e-3",
                                   y0.value, y0.std_error, oracle, gap)};
}

Outcome closed_form_jumps() {
  const auto d = desk("entropic_jumps");
  const double oracle = entropic_oracle(d->cfg);
  const auto y0 = d->engine->initial(d->xi);
  const double gap = std::abs(y0.value - oracle);
  return {gap <= 1e-2, fmt::format("Y0 {:.6f} (se {:.1e}) vs {:.6f}, gap {:.2e} <= 1e-2",
                                   y0.value, y0.std_error, oracle, gap)};
}

Outcome gradient_crosscheck() {
  const auto d = desk("entropic_allocate");
  const double h = d->cfg.method.h > 0.0 ? d->cfg.method.h : default_fd_step(d->xi);
  const MeasureAllocator measure(*d->engine, d->xi);
  bool ok = true;
  std::vector<std::string> notes;
  for (std::size_t i = 0; i < d->parts.size(); ++i) {
    const auto fd = gradient_fd(*d->engine, d->xi, d->parts[i], h, 0).summary;
    const auto qm = measure.allocate(d->parts[i], 0).summary;
    const double gap = std::abs(fd.value - qm.value);
    const double tol = std::max(2e-2, 4.0 * std::hypot(fd.std_error, qm.std_error));
    ok = ok && gap <= tol;
    notes.push_back(fmt::format("{} fd {:.4f} measure {:.4f} gap {:.1e} <= {:.1e}",
                                d->cfg.part_names[i], fd.value, qm.value, gap, tol));
  }
  return {ok, join(notes)};
}

Outcome aumann_shapley_full() {
  const auto d = desk("entropic_allocate");
  const double rho = d->engine->initial(d->xi).value;
  std::vector<double> residual, se;
  std::vector<std::string> notes;
  for (std::size_t nodes : {4u, 8u, 16u}) {
    AumannShapleyOptions opts;
    opts.nodes = nodes;
    const auto alloc = aumann_shapley(*d->engine, d->xi, d->parts, opts, 0);
    double total = 0.0, err = 0.0;
    for (const auto& a : alloc) {
      total += a.summary.value;
      err += a.summary.std_error;
    }
    residual.push_back(rho - total);
    se.push_back(err);
    notes.push_back(fmt::format("{} nodes residual {:.2e} (se {:.1e})", nodes, rho - total, err));
  }
  const bool small = std::abs(residual[2]) <= 1e-2;
  const bool shrinking = std::abs(residual[1]) <= std::abs(residual[0]) + se[1] &&
                         std::abs(residual[2]) <= std::abs(residual[1]) + se[2];
  return {small && shrinking, join(notes)};
}

Outcome coherent_collapse() {
  const auto d = desk("sublinear_coherent");
  const auto& engine = *d->engine;
  const double rho = engine.initial(d->xi).value;
  bool ok = true;
  std::vector<std::string> notes;
  for (double beta : {0.25, 0.5, 2.0}) {
    const double rb = engine.initial(scaled(d->xi, beta)).value;
    const double gap = std::abs(rb - beta * rho);
    const double tol = 1e-2 * (1.0 + std::abs(rho));
    ok = ok && gap <= tol;
    notes.push_back(fmt::format("scale {} gap {:.1e}", beta, gap));
  }
  AumannShapleyOptions opts;
  opts.nodes = 8;
  const auto as = aumann_shapley(engine, d->xi, d->parts, opts, 0);
  const MeasureAllocator measure(engine, d->xi);
  double worst = 0.0;
  for (std::size_t i = 0; i < d->parts.size(); ++i) {
    worst = std::max(worst,
                     std::abs(as[i].summary.value - measure.allocate(d->parts[i], 0).summary.value));
  }
  ok = ok && worst <= 1e-2;
  notes.push_back(fmt::format("AS vs gradient {:.1e}", worst));
  const double rep = coherent_representation(engine, d->xi, 0).summary.value;
  ok = ok && std::abs(rep - rho) <= 2e-2;
  notes.push_back(fmt::format("representation {:.5f} vs {:.5f}", rep, rho));
  return {ok, join(notes)};
}

Outcome convex_representation_match() {
  bool ok = true;
  std::vector<std::string> notes;
  for (const char* name : {"entropic_desk", "entropic_jumps"}) {
    const auto d = desk(name);
    const double rho = d->engine->initial(d->xi).value;
    const auto rep = convex_representation(*d->engine, d->xi, d->cfg.method.convex_nodes, 0);
    const double gap = std::abs(rep.summary.value - rho);
    ok = ok && gap <= 2e-2;
    notes.push_back(fmt::format("{} {:.5f} vs {:.5f} gap {:.1e}", name, rep.summary.value, rho, gap));
  }
  return {ok, join(notes)};
}

Outcome doleans_dade_checks() {
  std::vector<std::string> notes;
  bool ok = true;

  // Constant Brownian integrand against exp(theta W(T) - theta^2 T / 2).
  const auto brown = desk("entropic_desk");
  const auto& bb = *brown->bundle;
  const std::size_t n = bb.grid().steps(), paths = bb.path_count();
  const double theta = 0.5, T = bb.grid().horizon();
  const auto rn_w = doleans_dade(bb, PathField(n, paths, theta), {});
  std::vector<double> w(paths, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto dw = bb.brownian(i);
    for (std::size_t m = 0; m < paths; ++m) w[m] += dw[m];
  }
  double worst_w = 0.0;
  for (std::size_t m = 0; m < paths; ++m) {
    const double exact = std::exp(theta * w[m] - 0.5 * theta * theta * T);
    worst_w = std::max(worst_w, std::abs(rn_w.terminal()[m] - exact) / exact);
  }
  ok = ok && worst_w <= 1e-12;

  // Constant jump integrand against 1.5^{N(T)} e^{-0.5 lambda T}.
  const auto jumps = desk("entropic_jumps");
  const auto& jb = *jumps->bundle;
  std::vector<PathField> phi;
  phi.emplace_back(n, paths, 0.5);
  const auto rn_n = doleans_dade(jb, PathField(n, paths, 0.0), std::move(phi));
  const auto counts = jb.cumulative_jumps(0, n);
  const double lambda = jb.model().jumps[0].intensity;
  double worst_n = 0.0;
  for (std::size_t m = 0; m < paths; ++m) {
    const double exact = std::pow(1.5, counts[m]) * std::exp(-0.5 * lambda * T);
    worst_n = std::max(worst_n, std::abs(rn_n.terminal()[m] - exact) / exact);
  }
  ok = ok && worst_n <= 1e-12;
  notes.push_back(fmt::format("closed forms rel err {:.1e}, {:.1e}", worst_w, worst_n));

  // Density of the entropic risk-neutral measure on the jump desk.
  const MeasureAllocator alloc(*jumps->engine, jumps->xi);
  const auto diag = martingale_diagnostic(alloc.density());
  const auto& last = diag.back();
  const bool mart = std::abs(last.mean - 1.0) <= 3.0 * last.std_error;
  ok = ok && mart;
  notes.push_back(fmt::format("mean Lambda(T) {:.5f} (se {:.1e})", last.mean, last.std_error));

  std::size_t bad = 0;
  for (const auto& g : girsanov_shift_check(jb, alloc.density())) {
    if (!g.brownian_ok) ++bad;
    for (bool j : g.jump_ok) bad += j ? 0 : 1;
  }
  ok = ok && bad == 0;
  notes.push_back(fmt::format("girsanov nodes outside 4 se: {}", bad));
  return {ok, join(notes)};
}

Outcome clark_ocone_checks() {
  const auto jumps = desk("entropic_jumps");
  const auto affine = clark_ocone(Payoff::affine(0.0, 1.0), *jumps->bundle,
                                  jumps->cfg.method.regression);
  const auto clip = desk("clipped_exponential");
  const auto clipped = clark_ocone(*clip->cfg.payoff, *clip->bundle, clip->cfg.method.regression);
  const bool ok = affine.relative_residual <= 1e-10 && clipped.relative_residual <= 2e-2;
  return {ok, fmt::format("affine {:.1e} <= 1e-10; clipped exponential {:.2e} <= 2e-2",
                          affine.relative_residual, clipped.relative_residual)};
}

Outcome gamma_exponential_identity() {
  bool ok = true;
  std::vector<std::string> notes;
  for (const char* name : {"entropic_desk", "entropic_jumps"}) {
    const auto d = desk(name);
    const bool has_jumps = d->bundle->mark_count() > 0;
    const auto ctl = entropic_controls(d->cfg.driver.gamma, 1.0, *d->cfg.payoff, *d->bundle,
                                       d->cfg.method.regression);
    const double gap = gamma_exponential_check(ctl, *d->bundle, JumpControlMode::Exact).max_gap;
    const double tol = has_jumps ? 5e-2 : 3e-2;
    const auto sol = d->engine->solve(d->xi);
    double l2 = grid_l2_distance(ctl.z, sol.z());
    for (std::size_t k = 0; k < d->bundle->mark_count(); ++k) {
      l2 = std::max(l2, grid_l2_distance(ctl.upsilon[k], sol.upsilon(k)));
    }
    ok = ok && gap <= tol && l2 <= 3e-2;
    notes.push_back(fmt::format("{} gap {:.1e} <= {:.0e}, controls l2 {:.1e} <= 3e-2", name, gap,
                                tol, l2));
  }
  return {ok, join(notes)};
}

Outcome static_coherent() {
  const std::vector<double> xi{1.0, -1.0};
  const double c = 0.1;
  const auto res = entropic_coherent_static(c, xi);
  double best_g = 0.0, best = INFINITY;
  for (long long j = 1; j <= 10'000'000; ++j) {
    const double g = 1e-6 * static_cast<double>(j);
    const double f = (c + std::log(0.5 * (std::exp(-g) + std::exp(g)))) / g;
    if (f < best) {
      best = f;
      best_g = g;
    }
  }
  const double root_gap = std::abs(res.gamma_c - best_g);
  const auto twice = entropic_coherent_static(c, scaled(xi, 2.0));
  const double scale_gap = std::abs(twice.rho - 2.0 * res.rho);
  // E^Q[log dQ/dP] with dQ/dP = M q_m, computed directly on the two samples.
  const double a = std::exp(-res.gamma_c * xi[0]), b = std::exp(-res.gamma_c * xi[1]);
  const double qa = a / (a + b), qb = b / (a + b);
  const double entropy = qa * std::log(2.0 * qa) + qb * std::log(2.0 * qb);
  const double entropy_gap = std::abs(entropy - c);
  const bool ok = root_gap <= 1e-5 && scale_gap <= 1e-8 && entropy_gap <= 1e-6;
  return {ok, fmt::format("gamma_c {:.7f} vs grid {:.7f}; scaling gap {:.1e}; entropy gap {:.1e}",
                          res.gamma_c, best_g, scale_gap, entropy_gap)};
}

Outcome axiom_suites() {
  bool ok = true;
  std::vector<std::string> notes;
  for (const char* name : {"entropic_jumps", "sublinear_coherent"}) {
    const auto d = desk(name);
    AxiomInputs in;
    in.xi = d->xi;
    in.xi_other = scaled(d->xi, -1.0);
    in.dominated = d->xi;
    in.dominating = terminal_values(*d->bundle, Payoff::portfolio({*d->cfg.payoff,
                                                                   Payoff::affine(0.5, 0.0)}));
    std::vector<std::string> failed;
    for (const auto& r : axiom_suite(*d->engine, in)) {
      if (!r.pass) failed.push_back(fmt::format("{} {:.2e}", r.axiom, r.residual));
    }
    ok = ok && failed.empty();
    notes.push_back(fmt::format("{}: {}", name, failed.empty() ? "all pass" : join(failed)));
  }
  return {ok, join(notes)};
}

Outcome determinism() {
  auto cfg = validate_config(load_config(kConfigs / "entropic_desk.json"));
  const auto first = run_scenario(cfg, "risk").rows;
  const auto second = run_scenario(cfg, "risk").rows;
  const auto dir = fs::temp_directory_path() / "qerisk_acceptance";
  bool ok = true;
  for (auto format : {ReportFormat::Csv, ReportFormat::JsonLines}) {
    const auto a = emit_report(first, format, dir / "a", "run");
    const auto b = emit_report(second, format, dir / "b", "run");
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    ok = ok && !sa.str().empty() && sa.str() == sb.str();
  }
  fs::remove_all(dir);
  return {ok, fmt::format("{} rows, csv and json-lines payloads {}", first.size(),
                          ok ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"entropic closed form, Brownian", closed_form_brownian},
      {"entropic closed form, jumps", closed_form_jumps},
      {"gradient allocation: finite difference vs change of measure", gradient_crosscheck},
      {"Aumann-Shapley full allocation", aumann_shapley_full},
      {"coherent scaling and collapse", coherent_collapse},
      {"convex representation", convex_representation_match},
      {"Doleans-Dade density", doleans_dade_checks},
      {"Clark-Ocone reconstruction", clark_ocone_checks},
      {"entropic Gamma as stochastic exponential", gamma_exponential_identity},
      {"static entropic coherent measure", static_coherent},
      {"risk measure axioms", axiom_suites},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failed;
    std::printf("%s %2zu %s [%.0fs]: %s\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), secs, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
