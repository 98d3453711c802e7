#include "qerisk/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qerisk/error.hpp"
#include "qerisk/payoff.hpp"
#include "qerisk/random.hpp"

namespace qerisk {

TimeGrid::TimeGrid(double horizon, std::size_t steps)
    : horizon_(horizon), steps_(steps), dt_(horizon / static_cast<double>(steps)) {
  require(std::isfinite(horizon) && horizon > 0.0, "grid horizon must be positive");
  require(steps >= 1, "grid needs at least one step");
}

double TimeGrid::time(std::size_t node) const {
  require(node <= steps_, "grid node out of range");
  if (node == steps_) return horizon_;
  return static_cast<double>(node) * horizon_ / static_cast<double>(steps_);
}

TimeGrid build_grid(double horizon, long long steps) {
  require(steps >= 1, "grid needs at least one step, got " + std::to_string(steps));
  return TimeGrid(horizon, static_cast<std::size_t>(steps));
}

std::vector<double> LevyModel::intensities() const {
  std::vector<double> out;
  out.reserve(jumps.size());
  for (const auto& j : jumps) out.push_back(j.intensity);
  return out;
}

double LevyModel::total_intensity() const noexcept {
  double total = 0.0;
  for (const auto& j : jumps) total += j.intensity;
  return total;
}

void LevyModel::validate() const {
  require(std::isfinite(x0) && std::isfinite(mu), "model x0 and mu must be finite");
  require(std::isfinite(sigma) && sigma >= 0.0, "model sigma must be >= 0");
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const auto& j = jumps[k];
    require(std::isfinite(j.size) && j.size != 0.0,
            "jump mark " + std::to_string(k) + " must have a nonzero size");
    require(std::isfinite(j.intensity) && j.intensity > 0.0,
            "jump mark " + std::to_string(k) + " must have a positive intensity");
    for (std::size_t l = 0; l < k; ++l) {
      require(jumps[l].size != j.size, "jump marks must be distinct");
    }
  }
}

std::array<double, 4> LevyModel::terminal_cumulants(double horizon) const {
  std::array<double, 4> kappa{x0 + mu * horizon, sigma * sigma * horizon, 0.0, 0.0};
  for (const auto& j : jumps) {
    double power = j.size;
    for (int r = 0; r < 4; ++r) {
      kappa[r] += j.intensity * horizon * power;
      power *= j.size;
    }
  }
  return kappa;
}

double LevyModel::terminal_mean(double horizon) const { return terminal_cumulants(horizon)[0]; }
double LevyModel::terminal_variance(double horizon) const {
  return terminal_cumulants(horizon)[1];
}

PathBundle::PathBundle(LevyModel model, TimeGrid grid, std::size_t paths, std::uint64_t seed)
    : model_(std::move(model)),
      grid_(grid),
      paths_(paths),
      seed_(seed),
      dw_(grid.steps(), paths),
      x_(grid.node_count(), paths),
      jumps_(model_.mark_count() * grid.steps() * paths, 0) {}

std::span<const std::int32_t> PathBundle::jumps(std::size_t mark, std::size_t step) const {
  const std::size_t offset = (mark * grid_.steps() + step) * paths_;
  return {jumps_.data() + offset, paths_};
}

std::vector<double> PathBundle::cumulative_jumps(std::size_t mark, std::size_t node) const {
  std::vector<double> total(paths_, 0.0);
  for (std::size_t i = 0; i < node; ++i) {
    const auto counts = jumps(mark, i);
    for (std::size_t m = 0; m < paths_; ++m) total[m] += counts[m];
  }
  return total;
}

bool operator==(const PathBundle& a, const PathBundle& b) {
  return a.paths_ == b.paths_ && a.seed_ == b.seed_ && a.dw_ == b.dw_ && a.x_ == b.x_ &&
         a.jumps_ == b.jumps_;
}

PathBundle simulate_paths(const TimeGrid& grid, const LevyModel& model, long long paths,
                          std::uint64_t seed) {
  require(paths >= 1, "path count must be positive, got " + std::to_string(paths));
  model.validate();
  const auto m_count = static_cast<std::size_t>(paths);
  PathBundle bundle(model, grid, m_count, seed);

  const Philox4x32 gen(seed);
  const std::size_t n = grid.steps();
  const std::size_t k_count = model.mark_count();
  const double dt = grid.dt();
  const double sqdt = std::sqrt(dt);

  auto& dw = bundle.dw_;
  auto& x = bundle.x_;
  auto* counts = bundle.jumps_.data();

  // Counter layout: (path lo, path hi, step, stream); stream 0 is Brownian,
  // stream 1 + k feeds mark k.
  for (std::size_t m = 0; m < m_count; ++m) {
    const auto lo = static_cast<std::uint32_t>(m);
    const auto hi = static_cast<std::uint32_t>(static_cast<std::uint64_t>(m) >> 32);
    // States are rebuilt from running totals, x0 + mu t + sigma W + sum zeta N,
    // so a pure drift lands on x0 + mu T exactly instead of summing N rounded steps.
    double w = 0.0;
    std::vector<std::int64_t> total(k_count, 0);
    x(0, m) = model.x0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto step = static_cast<std::uint32_t>(i);
      const double dW = sqdt * normal_from_block(gen({lo, hi, step, 0u}));
      dw(i, m) = dW;
      w += dW;
      double state = model.x0 + model.mu * grid.time(i + 1) + model.sigma * w;
      for (std::size_t k = 0; k < k_count; ++k) {
        const auto block = gen({lo, hi, step, static_cast<std::uint32_t>(k + 1)});
        const std::int32_t count =
            poisson_inverse(model.jumps[k].intensity * dt, open_uniform(block[0], block[1]));
        counts[(k * n + i) * m_count + m] = count;
        total[k] += count;
        state += model.jumps[k].size * static_cast<double>(total[k]);
      }
      x(i + 1, m) = state;
    }
  }
  return bundle;
}

std::shared_ptr<const PathBundle> share(PathBundle bundle) {
  return std::make_shared<const PathBundle>(std::move(bundle));
}

std::vector<double> terminal_values(const PathBundle& bundle, const Payoff& payoff) {
  const auto xT = bundle.terminal_state();
  std::vector<double> out(xT.size());
  std::transform(xT.begin(), xT.end(), out.begin(), [&](double x) { return payoff(x); });
  return out;
}

}  // namespace qerisk
