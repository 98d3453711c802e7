#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qerisk/drivers.hpp"
#include "qerisk/market_model.hpp"
#include "qerisk/path_field.hpp"
#include "qerisk/regression.hpp"
#include "qerisk/stats.hpp"

namespace qerisk {

/// Clamp applied to driver inputs. Bounded terminals have bounded controls,
/// so the clamp only catches Monte Carlo outliers; hits are counted.
struct SolverOptions {
  double z_max = 10.0;
  double upsilon_max = 5.0;
};

struct StepDiagnostics {
  double r_squared = 1.0;
  double condition = 1.0;
  std::size_t basis_size = 1;
};

/// (Y, Z, Upsilon) on the grid. Y has N + 1 rows, Z and each Upsilon_k have N.
class BsdeSolution {
 public:
  BsdeSolution(std::size_t steps, std::size_t marks, std::size_t paths);

  std::size_t steps() const noexcept { return z_.rows(); }
  std::size_t mark_count() const noexcept { return upsilon_.size(); }
  std::size_t path_count() const noexcept { return y_.paths(); }

  const PathField& y() const noexcept { return y_; }
  const PathField& z() const noexcept { return z_; }
  const PathField& upsilon(std::size_t mark) const { return upsilon_.at(mark); }
  PathField& y() noexcept { return y_; }
  PathField& z() noexcept { return z_; }
  PathField& upsilon(std::size_t mark) { return upsilon_.at(mark); }

  /// Y_0 (the F_0-measurable value; identical on all paths).
  double initial_value() const noexcept { return y_(0, 0); }

  /// terminal + sum_i g(Z_i, U_i) dt, per path. Its mean equals Y_0 under the
  /// scheme, which makes it the path-wise handle for standard errors.
  const std::vector<double>& pathwise_value() const noexcept { return pathwise_; }
  Estimate initial_estimate() const;

  const std::vector<StepDiagnostics>& diagnostics() const noexcept { return diagnostics_; }
  std::size_t clamp_count() const noexcept { return clamps_; }

  /// Controls at (step, path) gathered into `u` (size K).
  void controls(std::size_t step, std::size_t path, std::span<double> u) const;

 private:
  friend BsdeSolution solve_bsde(const PathBundle&, const Driver&, std::span<const double>,
                                 const RegressionConfig&, const SolverOptions&);

  PathField y_;
  PathField z_;
  std::vector<PathField> upsilon_;
  std::vector<double> pathwise_;
  std::vector<StepDiagnostics> diagnostics_;
  std::size_t clamps_ = 0;
};

/// Explicit backward Euler with regression conditional expectations:
///   Z_i   = E[Y_{i+1} dW_i | X_i] / dt
///   U_k,i = E[Y_{i+1} (dN_k,i - lambda_k dt) | X_i] / (lambda_k dt)
///   Y_i   = E[Y_{i+1} | X_i] + g(Z_i, U_i) dt
/// The martingale-increment projections use Y_{i+1} minus its fitted value,
/// which has the same conditional expectation and much less noise. At i = 0
/// the conditioning is trivial and plain means are used.
BsdeSolution solve_bsde(const PathBundle& bundle, const Driver& driver,
                        std::span<const double> terminal, const RegressionConfig& cfg = {},
                        const SolverOptions& opts = {});

struct ReplayStep {
  double mean = 0.0;
  double std_error = 0.0;
  bool flagged = false;  // |mean| > 3 std_error
};

/// Per step, the path mean of
///   Y_{i+1} - Y_i + g dt - Z_i dW_i - sum_k U_k,i (dN_k,i - lambda_k dt).
/// The error pools the spread of the increment side and of the stochastic
/// integral side.
std::vector<ReplayStep> residual_replay(const BsdeSolution& solution, const PathBundle& bundle,
                                        const Driver& driver);

}  // namespace qerisk
