#pragma once

#include <cstddef>
#include <cstdint>
#include <array>
#include <memory>
#include <span>
#include <vector>

#include "qerisk/path_field.hpp"

namespace qerisk {

class Payoff;

/// Uniform grid t_i = i T / N on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t node_count() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return dt_; }
  /// t_N is returned as the horizon itself, never as N * dt.
  double time(std::size_t node) const;

 private:
  double horizon_;
  std::size_t steps_;
  double dt_;
};

TimeGrid build_grid(double horizon, long long steps);

struct JumpMark {
  double size = 0.0;       // zeta_k, nonzero
  double intensity = 0.0;  // lambda_k > 0
};

/// Arithmetic jump-diffusion dX = mu dt + sigma dW + sum_k zeta_k dN_k with a
/// finite, discrete Levy measure nu = sum_k lambda_k delta_{zeta_k}.
struct LevyModel {
  double x0 = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  std::vector<JumpMark> jumps;

  std::size_t mark_count() const noexcept { return jumps.size(); }
  std::vector<double> intensities() const;
  double total_intensity() const noexcept;

  /// Throws InvalidArgument on sigma < 0, zero or repeated marks, lambda <= 0.
  void validate() const;

  /// First four cumulants of X(T).
  std::array<double, 4> terminal_cumulants(double horizon) const;
  double terminal_mean(double horizon) const;
  double terminal_variance(double horizon) const;
};

/// Simulated increments and states. Immutable once built.
class PathBundle {
 public:
  PathBundle(LevyModel model, TimeGrid grid, std::size_t paths, std::uint64_t seed);

  const LevyModel& model() const noexcept { return model_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t path_count() const noexcept { return paths_; }
  std::size_t mark_count() const noexcept { return model_.mark_count(); }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Brownian increments over step i, one entry per path.
  std::span<const double> brownian(std::size_t step) const { return dw_.row(step); }
  /// Jump counts of mark k over step i.
  std::span<const std::int32_t> jumps(std::size_t mark, std::size_t step) const;
  /// X(t_i) across paths.
  std::span<const double> state(std::size_t node) const { return x_.row(node); }
  std::span<const double> terminal_state() const { return x_.row(grid_.steps()); }
  /// N_k(t_i): jumps of mark k accumulated up to node i.
  std::vector<double> cumulative_jumps(std::size_t mark, std::size_t node) const;

  const PathField& increments() const noexcept { return dw_; }
  const PathField& states() const noexcept { return x_; }

  friend bool operator==(const PathBundle& a, const PathBundle& b);
  friend PathBundle simulate_paths(const TimeGrid&, const LevyModel&, long long, std::uint64_t);

 private:
  LevyModel model_;
  TimeGrid grid_;
  std::size_t paths_;
  std::uint64_t seed_;
  PathField dw_;                     // steps x paths
  PathField x_;                      // nodes x paths
  std::vector<std::int32_t> jumps_;  // (mark, step, path)
};

/// Draws every (path, step) coordinate from its own Philox counter, so
/// bundles with more paths extend the smaller ones path for path.
PathBundle simulate_paths(const TimeGrid& grid, const LevyModel& model,
                          long long paths, std::uint64_t seed);

std::shared_ptr<const PathBundle> share(PathBundle bundle);

/// f(X_m(T)) for every path.
std::vector<double> terminal_values(const PathBundle& bundle, const Payoff& payoff);

}  // namespace qerisk
