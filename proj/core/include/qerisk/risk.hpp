#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qerisk/bsde.hpp"
#include "qerisk/payoff.hpp"

namespace qerisk {

enum class RiskMode { Bsde, EntropicClosedForm };

/// Dynamic risk measure rho_t(xi) = Y_t, where Y solves the BSDE with
/// terminal value -xi (so that rho_T(xi) = -xi).
class RiskEngine {
 public:
  RiskEngine(std::shared_ptr<const PathBundle> bundle, Driver driver,
             RegressionConfig cfg = {}, SolverOptions opts = {},
             RiskMode mode = RiskMode::Bsde);

  const PathBundle& bundle() const noexcept { return *bundle_; }
  const std::shared_ptr<const PathBundle>& shared_bundle() const noexcept { return bundle_; }
  const Driver& driver() const noexcept { return driver_; }
  const RegressionConfig& regression() const noexcept { return cfg_; }
  const SolverOptions& solver_options() const noexcept { return opts_; }
  RiskMode mode() const noexcept { return mode_; }

  /// BSDE solved for terminal -position.
  BsdeSolution solve(std::span<const double> position) const;
  /// rho_t per path at grid node t.
  std::vector<double> evaluate(std::span<const double> position, std::size_t node) const;
  /// rho_0 with a Monte Carlo standard error.
  Estimate initial(std::span<const double> position) const;

 private:
  std::shared_ptr<const PathBundle> bundle_;
  Driver driver_;
  RegressionConfig cfg_;
  SolverOptions opts_;
  RiskMode mode_;
};

/// rho_t(xi) per path.
std::vector<double> dynamic_risk(const RiskEngine& engine, const Payoff& xi, std::size_t node);

/// (1/gamma) log E[exp(-gamma xi) | X(t)]; plain sample mean at t = 0 and a
/// regression on X(t) otherwise. Throws EstimatorFailure (with the offending
/// path indices) when the inner estimate is not positive.
std::vector<double> entropic_closed_form(double gamma, std::span<const double> position,
                                         std::size_t node, const PathBundle& bundle,
                                         const RegressionConfig& cfg = {});
std::vector<double> entropic_closed_form(double gamma, const Payoff& xi, std::size_t node,
                                         const PathBundle& bundle,
                                         const RegressionConfig& cfg = {});

struct StaticCoherentResult {
  double gamma_c = 0.0;
  double rho = 0.0;
  /// E^Q[log dQ/dP] for dQ/dP = e^{-gamma_c xi} / E[e^{-gamma_c xi}].
  double entropy = 0.0;
  bool degenerate = false;
};

/// Entropic coherent risk at level c: inf_{gamma>0} (c + log E[e^{-gamma xi}]) / gamma.
/// The minimiser solves relative_entropy(Q_gamma | P) = c, located by
/// bisection. A constant sample has no finite minimiser; the result is then
/// flagged degenerate with rho = -xi.
StaticCoherentResult entropic_coherent_static(double c, std::span<const double> samples);

/// Relative entropy of Q_gamma (dQ/dP = e^{-gamma xi}/E[e^{-gamma xi}]) on samples.
double entropic_relative_entropy(double gamma, std::span<const double> samples);
/// c / gamma + (1/gamma) log mean(e^{-gamma xi}).
double entropic_coherent_objective(double c, double gamma, std::span<const double> samples);

struct AxiomInputs {
  std::vector<double> xi;
  std::vector<double> xi_other;   // second position for convexity / subadditivity
  std::vector<double> dominated;  // path-wise <= dominating
  std::vector<double> dominating;
  double cash = 1.0;
  double mix = 0.5;
  double scale = 2.0;
  double monotonicity_tol = 5e-3;
  double translation_tol = 5e-3;
  double convexity_tol = 5e-3;
  double homogeneity_tol = 1e-2;
  double subadditivity_tol = 1e-2;
};

struct AxiomResult {
  std::string axiom;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Monotonicity, translation invariance, convexity, terminal condition
/// rho_T = -xi, and, for positively homogeneous drivers, positive
/// homogeneity and subadditivity. Residuals are signed so that <= tolerance
/// means the axiom holds.
std::vector<AxiomResult> axiom_suite(const RiskEngine& engine, const AxiomInputs& inputs);

}  // namespace qerisk
