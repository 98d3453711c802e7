#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qerisk/market_model.hpp"
#include "qerisk/regression.hpp"

namespace qerisk {

/// Regression features at a grid node: X(t_i), plus N_k(t_i) per mark when
/// the config asks for jump counts. Owns the count columns it builds.
class NodeFeatures {
 public:
  NodeFeatures(const PathBundle& bundle, std::size_t node, const RegressionConfig& cfg) {
    columns_.push_back(bundle.state(node));
    if (cfg.jump_count_features) {
      for (std::size_t k = 0; k < bundle.mark_count(); ++k) {
        counts_.push_back(bundle.cumulative_jumps(k, node));
      }
      for (const auto& c : counts_) columns_.emplace_back(c);
    }
  }
  NodeFeatures(const NodeFeatures&) = delete;
  NodeFeatures& operator=(const NodeFeatures&) = delete;

  std::span<const std::span<const double>> columns() const noexcept { return columns_; }

 private:
  std::vector<std::vector<double>> counts_;
  std::vector<std::span<const double>> columns_;
};

}  // namespace qerisk
