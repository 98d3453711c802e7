#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qerisk {

struct RegressionConfig {
  unsigned degree = 3;
  double ridge = 1e-8;
  /// Add N_k(t_i) (per mark) as linear features next to X(t_i).
  bool jump_count_features = false;
};

/// Least-squares projection onto {1} + polynomials of each feature.
///
/// Each feature is standardised, raised to powers 1..degree and centred, so
/// the intercept decouples: fitted = mean(y) + B beta with
/// (B'B / M + ridge I) beta = B'(y - mean(y)) / M. The ridge never touches
/// the intercept, which keeps constants exact. Features with zero spread
/// carry no information and are dropped.
class ConditionalProjector {
 public:
  ConditionalProjector(std::span<const std::span<const double>> features,
                       const RegressionConfig& cfg);

  std::size_t path_count() const noexcept { return paths_; }
  std::size_t basis_size() const noexcept { return static_cast<std::size_t>(basis_.cols()) + 1; }
  /// Ratio of extreme eigenvalues of the penalised Gram matrix (1 if empty).
  double condition() const noexcept { return condition_; }

  std::vector<double> project(std::span<const double> targets) const;
  void project(std::span<const double> targets, std::span<double> fitted) const;

 private:
  std::size_t paths_ = 0;
  Eigen::MatrixXd basis_;  // paths x (basis - 1), centred columns
  Eigen::LDLT<Eigen::MatrixXd> gram_;
  double condition_ = 1.0;
};

/// Fitted conditional expectation of `targets` given the rows of `features`
/// (paths x q). Throws SolverFailure on rank deficiency without a ridge,
/// InvalidArgument unless paths > basis size.
std::vector<double> regress_condexp(const Eigen::MatrixXd& features,
                                    std::span<const double> targets,
                                    const RegressionConfig& cfg);

/// Degree-1 least-squares trend of `targets` on the features. Conditional
/// expectations of exponentials are taken as E[e^a | F] = e^l E[e^{a - l} | F]
/// with l the trend of a: the identity holds for any F-measurable l, and
/// e^{a - l} is much closer to the polynomial span than e^a, so the fitted
/// values stay positive in the tails.
std::vector<double> linear_trend(std::span<const std::span<const double>> features,
                                 std::span<const double> targets, double ridge);

/// R^2 of a fit.
double r_squared(std::span<const double> targets, std::span<const double> fitted);

}  // namespace qerisk
