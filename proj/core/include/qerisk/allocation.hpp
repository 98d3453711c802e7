#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qerisk/measure.hpp"
#include "qerisk/risk.hpp"

namespace qerisk {

/// Value of a conditional allocation at a grid node: per-path values plus a
/// summary (the t = 0 estimator with its standard error; at later nodes the
/// path average and its spread).
struct ConditionalEstimate {
  std::size_t node = 0;
  std::vector<double> path_values;
  Estimate summary;
};

/// 0.05 (1 + max |xi|).
double default_fd_step(std::span<const double> position);

/// Central difference [rho_t(xi + h eta) - rho_t(xi - h eta)] / (2h) on the
/// engine's common paths. The error comes from differencing the path-wise
/// BSDE values.
ConditionalEstimate gradient_fd(const RiskEngine& engine, std::span<const double> xi,
                                std::span<const double> eta, double h, std::size_t node);

/// Density of Q^xi: solves the BSDE for -xi, feeds dg/dz and the jump
/// partials of the solved controls into the Doleans-Dade exponential.
class MeasureAllocator {
 public:
  MeasureAllocator(const RiskEngine& engine, std::span<const double> xi,
                   double kazamaki_delta = 1e-6);

  const RNProcess& density() const noexcept { return rn_; }
  double risk() const noexcept { return risk_; }

  /// E^{Q^xi}[-eta | F_t].
  ConditionalEstimate allocate(std::span<const double> eta, std::size_t node) const;

 private:
  const RiskEngine* engine_;
  RNProcess rn_;
  double risk_;
};

/// gradient allocation by change of measure: E^{Q^xi}[-eta | F_t].
ConditionalEstimate gradient_measure(const RiskEngine& engine, std::span<const double> xi,
                                     std::span<const double> eta, std::size_t node);

enum class InnerGradient { FiniteDifference, Measure };

struct AumannShapleyOptions {
  std::size_t nodes = 16;
  InnerGradient inner = InnerGradient::Measure;
  double h = 0.0;  // <= 0 picks default_fd_step(beta xi) per node
};

/// sum_j w_j grad_{eta_i} rho_t(beta_j xi) with Gauss-Legendre nodes on (0,1),
/// for every direction at once (one BSDE per node is shared).
std::vector<ConditionalEstimate> aumann_shapley(const RiskEngine& engine,
                                                std::span<const double> xi,
                                                std::span<const std::vector<double>> directions,
                                                const AumannShapleyOptions& opts,
                                                std::size_t node);
ConditionalEstimate aumann_shapley(const RiskEngine& engine, std::span<const double> xi,
                                   std::span<const double> eta, const AumannShapleyOptions& opts,
                                   std::size_t node);

/// rho_t(xi) = E[-Lambda^xi(T,t) xi | F_t] with
/// Lambda^xi(T,t) = sum_j w_j E(M^{beta_j xi})(T) / E(M^{beta_j xi})(t).
ConditionalEstimate convex_representation(const RiskEngine& engine, std::span<const double> xi,
                                          std::size_t quadrature_nodes, std::size_t node);

/// Positively homogeneous drivers only: Lambda = E(M^xi)(T) / E(M^xi)(t).
/// Throws Misuse for other drivers.
ConditionalEstimate coherent_representation(const RiskEngine& engine,
                                            std::span<const double> xi, std::size_t node);

struct AllocationRow {
  std::string direction;
  Estimate fd;
  Estimate measure;
  Estimate aumann_shapley;
  double fd_measure_gap = 0.0;
  double fd_as_gap = 0.0;
};

struct AllocationReport {
  std::vector<AllocationRow> rows;
  Estimate risk;
  double fd_step = 0.0;
  std::size_t quadrature_nodes = 0;
  std::uint64_t seed = 0;
};

/// Runs all three allocation methods for every direction at t = 0.
AllocationReport allocate_all(const RiskEngine& engine, std::span<const double> xi,
                              std::span<const std::vector<double>> directions,
                              std::span<const std::string> names, double h,
                              const AumannShapleyOptions& as_opts);

enum class AllocationMethod { FiniteDifference, Measure, AumannShapley };

struct FullAllocationCheck {
  double residual = 0.0;  // rho - sum_i alloc_i
  double pooled_se = 0.0;
  bool pass = false;
};

FullAllocationCheck full_allocation_check(const AllocationReport& report, double rho,
                                          AllocationMethod method, double threshold);

}  // namespace qerisk
