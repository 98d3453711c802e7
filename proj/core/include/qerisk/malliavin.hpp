#pragma once

#include <cstddef>
#include <vector>

#include "qerisk/market_model.hpp"
#include "qerisk/path_field.hpp"
#include "qerisk/payoff.hpp"
#include "qerisk/regression.hpp"
#include "qerisk/stats.hpp"

namespace qerisk {

/// Malliavin derivatives of xi = f(X(T)) in the arithmetic model. D_t X(T)
/// equals sigma for every t <= T, so both derivatives are constant in t and
/// are stored once per path.
class MalliavinField {
 public:
  MalliavinField(double horizon, std::vector<double> brownian,
                 std::vector<std::vector<double>> jump);

  /// D_t xi on path m (zero for t > T).
  double brownian(double t, std::size_t path) const;
  /// D_{t,zeta_k} xi on path m (zero for t > T).
  double jump(double t, std::size_t mark, std::size_t path) const;

  const std::vector<double>& brownian_values() const noexcept { return brownian_; }
  const std::vector<double>& jump_values(std::size_t mark) const { return jump_.at(mark); }
  std::size_t mark_count() const noexcept { return jump_.size(); }

 private:
  double horizon_;
  std::vector<double> brownian_;
  std::vector<std::vector<double>> jump_;
};

/// D_t xi = f'(X(T)) sigma and D_{t,zeta_k} xi = f(X(T) + zeta_k) - f(X(T)).
/// Throws UnsupportedPayoff for functionals outside the closed family.
MalliavinField malliavin_derivative(const Payoff& xi, const PathBundle& bundle);

struct ClarkOconeResult {
  PathField brownian_integrand;            // u(t_i) = E[D_t xi | X(t_i)], N rows
  std::vector<PathField> jump_integrand;   // v_k(t_i) = E[D_{t,zeta_k} xi | X(t_i)]
  std::vector<double> reconstruction;      // xi_hat per path
  double expectation = 0.0;                // E[xi] used as the constant term
  bool analytic_expectation = false;
  double relative_residual = 0.0;          // |xi_hat - xi|_2 / |xi|_2
  Estimate integral_mean;                  // mean of the stochastic-integral part
};

/// xi_hat = E[xi] + sum_i u(t_i) dW_i + sum_{i,k} v_k(t_i) (dN_k,i - lambda_k dt).
/// E[xi] is the closed-form expectation where the family has one, otherwise
/// the sample mean.
ClarkOconeResult clark_ocone(const Payoff& xi, const PathBundle& bundle,
                             const RegressionConfig& cfg = {});

struct EntropicControls {
  double gamma = 0.0;
  double beta = 0.0;
  PathField z;                             // N rows
  std::vector<PathField> upsilon;          // exact jump chain rule, N rows each
  std::vector<PathField> upsilon_literal;  // linearised D_{t,zeta} xi form
  PathField gamma_process;                 // Gamma(t_i) = E[e^{-gamma beta xi} | X(t_i)], N + 1 rows
  double exact_literal_gap = 0.0;          // grid-L2 distance between the jump controls
};

/// Controls of the entropic BSDE with terminal -beta xi from the conditional
/// expectations of e^{-gamma beta xi}:
///   Z   = -beta E[e^{-gamma beta xi} D_t xi | F_t] / Gamma
///   U_k = (1/gamma) log(E[e^{-gamma beta f(X(T) + zeta_k)} | F_t] / Gamma)
/// plus the linearised U_k = -beta E[e^{-gamma beta xi} D_{t,zeta_k} xi | F_t] / Gamma.
EntropicControls entropic_controls(double gamma, double beta, const Payoff& xi,
                                   const PathBundle& bundle, const RegressionConfig& cfg = {});

enum class JumpControlMode { Exact, Literal };

struct GammaExponentialCheck {
  std::vector<double> node_gap;  // mean_m |E(M)(t_i) - Gamma(t_i)/Gamma(0)|
  double max_gap = 0.0;
};

/// Compares the Doleans-Dade exponential built from the controls
/// (phi_z = gamma Z, phi_k = e^{gamma U_k} - 1, or gamma U_k literal) with
/// the regression estimate of Gamma(t)/Gamma(0).
GammaExponentialCheck gamma_exponential_check(const EntropicControls& controls,
                                              const PathBundle& bundle,
                                              JumpControlMode mode = JumpControlMode::Exact);

/// sqrt(mean over steps and paths of (a - b)^2).
double grid_l2_distance(const PathField& a, const PathField& b);

}  // namespace qerisk
