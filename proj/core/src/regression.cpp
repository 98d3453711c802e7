#include "qerisk/regression.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qerisk/error.hpp"
#include "qerisk/stats.hpp"

namespace qerisk {

ConditionalProjector::ConditionalProjector(std::span<const std::span<const double>> features,
                                           const RegressionConfig& cfg) {
  require(cfg.ridge >= 0.0 && std::isfinite(cfg.ridge), "ridge penalty must be >= 0");
  require(!features.empty(), "projector needs at least one feature");
  paths_ = features.front().size();
  for (const auto& f : features) require(f.size() == paths_, "feature lengths differ");

  const auto rows = static_cast<Eigen::Index>(paths_);
  std::vector<Eigen::VectorXd> columns;
  for (const auto& f : features) {
    const double mu = mean(f);
    const double sd = std::sqrt(sample_variance(f));
    if (!std::isfinite(mu) || !std::isfinite(sd)) {
      fail(ErrorCode::SolverFailure, "non-finite regression feature");
    }
    if (sd <= 1e-12 * std::max(1.0, std::abs(mu))) continue;
    Eigen::Map<const Eigen::VectorXd> raw(f.data(), rows);
    const Eigen::VectorXd standard = (raw.array() - mu) / sd;
    Eigen::VectorXd power = Eigen::VectorXd::Ones(rows);
    for (unsigned d = 1; d <= cfg.degree; ++d) {
      power = power.cwiseProduct(standard);
      columns.push_back(power.array() - power.mean());
    }
  }

  const auto q = static_cast<Eigen::Index>(columns.size());
  require(paths_ > columns.size() + 1,
          "regression needs more paths (" + std::to_string(paths_) + ") than basis functions (" +
              std::to_string(columns.size() + 1) + ")");
  basis_.resize(rows, q);
  for (Eigen::Index j = 0; j < q; ++j) basis_.col(j) = columns[static_cast<std::size_t>(j)];
  if (q == 0) return;

  Eigen::MatrixXd gram = (basis_.transpose() * basis_) / static_cast<double>(paths_);
  gram.diagonal().array() += cfg.ridge;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!std::isfinite(hi) || lo <= 1e-13 * hi) {
    fail(ErrorCode::SolverFailure,
         "regression Gram matrix is singular (min eigenvalue " + std::to_string(lo) + ")");
  }
  condition_ = hi / lo;
  gram_.compute(gram);
  if (gram_.info() != Eigen::Success) {
    fail(ErrorCode::SolverFailure, "regression factorisation failed");
  }
}

void ConditionalProjector::project(std::span<const double> targets,
                                   std::span<double> fitted) const {
  require(targets.size() == paths_ && fitted.size() == paths_, "projection length mismatch");
  const double centre = mean(targets);
  Eigen::Map<Eigen::VectorXd> out(fitted.data(), static_cast<Eigen::Index>(paths_));
  if (basis_.cols() == 0) {
    out.setConstant(centre);
    return;
  }
  Eigen::Map<const Eigen::VectorXd> y(targets.data(), static_cast<Eigen::Index>(paths_));
  const Eigen::VectorXd rhs =
      (basis_.transpose() * (y.array() - centre).matrix()) / static_cast<double>(paths_);
  const Eigen::VectorXd beta = gram_.solve(rhs);
  out.noalias() = basis_ * beta;
  out.array() += centre;
}

std::vector<double> ConditionalProjector::project(std::span<const double> targets) const {
  std::vector<double> fitted(paths_);
  project(targets, fitted);
  return fitted;
}

std::vector<double> regress_condexp(const Eigen::MatrixXd& features,
                                    std::span<const double> targets,
                                    const RegressionConfig& cfg) {
  require(static_cast<std::size_t>(features.rows()) == targets.size(),
          "features and targets disagree on the path count");
  std::vector<std::span<const double>> columns;
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    columns.emplace_back(features.col(j).data(), static_cast<std::size_t>(features.rows()));
  }
  ConditionalProjector projector(columns, cfg);
  return projector.project(targets);
}

std::vector<double> linear_trend(std::span<const std::span<const double>> features,
                                 std::span<const double> targets, double ridge) {
  RegressionConfig linear;
  linear.degree = 1;
  linear.ridge = ridge;
  return ConditionalProjector(features, linear).project(targets);
}

double r_squared(std::span<const double> targets, std::span<const double> fitted) {
  const double centre = mean(targets);
  double ssr = 0.0, sst = 0.0;
  for (std::size_t m = 0; m < targets.size(); ++m) {
    ssr += (targets[m] - fitted[m]) * (targets[m] - fitted[m]);
    sst += (targets[m] - centre) * (targets[m] - centre);
  }
  return sst > 0.0 ? 1.0 - ssr / sst : 1.0;
}

}  // namespace qerisk
