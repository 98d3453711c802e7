#include "qerisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "qerisk/error.hpp"

namespace qerisk {

double compensated_sum(std::span<const double> values) noexcept {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

double mean(std::span<const double> values) noexcept {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  return compensated_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) noexcept {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return acc / static_cast<double>(n - 1);
}

Estimate mean_estimate(std::span<const double> values) noexcept {
  const double n = static_cast<double>(values.size());
  return {mean(values), std::sqrt(sample_variance(values) / n)};
}

Estimate weighted_mean_estimate(std::span<const double> weights,
                                std::span<const double> values) noexcept {
  const std::size_t n = values.size();
  std::vector<double> wx(n);
  for (std::size_t m = 0; m < n; ++m) wx[m] = weights[m] * values[m];
  const double sw = compensated_sum(weights);
  const double ratio = compensated_sum(wx) / sw;
  double acc = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double d = weights[m] * (values[m] - ratio);
    acc += d * d;
  }
  const double nd = static_cast<double>(n);
  const double wbar = sw / nd;
  const double se = n > 1 ? std::sqrt(acc / (nd - 1.0) / nd) / std::abs(wbar) : 0.0;
  return {ratio, se};
}

double log_mean_exp(std::span<const double> values) noexcept {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double shift = *std::max_element(values.begin(), values.end());
  std::vector<double> e(values.size());
  for (std::size_t m = 0; m < values.size(); ++m) e[m] = std::exp(values[m] - shift);
  return shift + std::log(mean(e));
}

Quadrature gauss_legendre_unit(std::size_t n) {
  require(n >= 1, "quadrature needs at least one node");
  // Golub-Welsch: eigenvalues of the Jacobi matrix are the nodes on (-1, 1),
  // first eigenvector components squared give the weights (times 2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double off = kk / std::sqrt(4.0 * kk * kk - 1.0);
    jacobi(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = off;
    jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double v = eig.eigenvectors()(0, kk);
    q.nodes[k] = 0.5 * (eig.eigenvalues()(kk) + 1.0);
    q.weights[k] = v * v;  // 2 v^2 on (-1,1), halved for (0,1)
  }
  return q;
}

}  // namespace qerisk
