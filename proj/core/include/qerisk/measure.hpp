#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qerisk/market_model.hpp"
#include "qerisk/path_field.hpp"
#include "qerisk/regression.hpp"
#include "qerisk/stats.hpp"

namespace qerisk {

/// Doleans-Dade density process Lambda(t_i) of
/// M = int phi_z dW + sum_k int phi_k dN~_k.
class RNProcess {
 public:
  RNProcess(PathField density, PathField phi_z, std::vector<PathField> phi_jump,
            double kazamaki_margin);

  const PathField& density() const noexcept { return density_; }
  std::span<const double> terminal() const { return density_.row(density_.rows() - 1); }
  const PathField& phi_z() const noexcept { return phi_z_; }
  const PathField& phi_jump(std::size_t mark) const { return phi_jump_.at(mark); }
  std::size_t mark_count() const noexcept { return phi_jump_.size(); }
  std::size_t steps() const noexcept { return phi_z_.rows(); }
  std::size_t path_count() const noexcept { return density_.paths(); }
  /// min over paths and steps of 1 + phi_k (1 without marks, as for phi = 0).
  double kazamaki_margin() const noexcept { return margin_; }

 private:
  PathField density_;
  PathField phi_z_;
  std::vector<PathField> phi_jump_;
  double margin_;
};

/// Lambda_{i+1} = Lambda_i exp(phi_z dW - phi_z^2 dt / 2)
///                * prod_k (1 + phi_k)^{dN_k} exp(-phi_k lambda_k dt).
/// Exact per-step factors; constant integrands reproduce the closed forms.
/// Throws SignedDensityFailure when a jump occurs where 1 + phi_k <= 0.
RNProcess doleans_dade(const PathBundle& bundle, PathField phi_z, std::vector<PathField> phi_jump);

struct KazamakiReport {
  bool pass = false;
  double worst_margin = 0.0;  // min(1 + phi_k) - delta
};

KazamakiReport kazamaki_check(const RNProcess& rn, double delta);

struct MartingaleNode {
  double mean = 1.0;
  double std_error = 0.0;
  bool flagged = false;  // |mean - 1| > 3 std_error
};

std::vector<MartingaleNode> martingale_diagnostic(const RNProcess& rn);

/// E^Q[payload | F_t] with self-normalised weights: at t = 0
/// mean(Lambda_T payload) / mean(Lambda_T); later, the ratio of the
/// regressions of Lambda_T payload and Lambda_T on X(t).
struct WeightedExpectation {
  std::vector<double> path_values;
  Estimate summary;  // value (t = 0 estimator or path average) and error
};

WeightedExpectation reweighted_expectation(const RNProcess& rn, std::span<const double> payload,
                                           std::size_t node, const PathBundle& bundle,
                                           const RegressionConfig& cfg = {});
/// Same, with explicit weights per path (used by mixtures of exponentials).
WeightedExpectation reweighted_expectation(std::span<const double> weights,
                                           std::span<const double> payload, std::size_t node,
                                           const PathBundle& bundle,
                                           const RegressionConfig& cfg = {});

struct GirsanovNode {
  double brownian_shift = 0.0;   // E^Q[dW_i]
  double brownian_target = 0.0;  // mean over paths of phi_z(t_i) dt
  double brownian_se = 0.0;
  bool brownian_ok = true;
  std::vector<double> jump_mean;    // E^Q[dN_k,i]
  std::vector<double> jump_target;  // lambda_k (1 + phi_k) dt, path-averaged under Q
  std::vector<double> jump_se;
  std::vector<bool> jump_ok;
};

/// Girsanov drift and intensity diagnostics per step, each tolerated at 4 SE.
std::vector<GirsanovNode> girsanov_shift_check(const PathBundle& bundle, const RNProcess& rn);

}  // namespace qerisk
