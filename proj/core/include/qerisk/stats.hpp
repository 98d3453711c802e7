#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qerisk {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Compensated (Neumaier) sum. Means of constant vectors come back exact to
/// one ulp, which the constant-payoff identities rely on.
double compensated_sum(std::span<const double> values) noexcept;
double mean(std::span<const double> values) noexcept;
double sample_variance(std::span<const double> values) noexcept;

/// Mean with its Monte Carlo standard error sd / sqrt(n).
Estimate mean_estimate(std::span<const double> values) noexcept;

/// Self-normalised ratio sum(w * x) / sum(w) with delta-method error.
Estimate weighted_mean_estimate(std::span<const double> weights,
                                std::span<const double> values) noexcept;

/// log(mean(exp(values))) evaluated with a max shift.
double log_mean_exp(std::span<const double> values) noexcept;

/// Nodes and weights of n-point Gauss-Legendre quadrature mapped to (0, 1).
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_legendre_unit(std::size_t n);

}  // namespace qerisk
