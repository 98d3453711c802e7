#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace qerisk {

/// Dense (node x path) table of doubles. Rows are grid nodes or steps, so a
/// whole cross-section of paths is contiguous for the per-step regressions.
class PathField {
 public:
  PathField() = default;
  PathField(std::size_t rows, std::size_t paths, double fill = 0.0)
      : rows_(rows), paths_(paths), data_(rows * paths, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t paths() const noexcept { return paths_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> row(std::size_t r) noexcept {
    assert(r < rows_);
    return {data_.data() + r * paths_, paths_};
  }
  std::span<const double> row(std::size_t r) const noexcept {
    assert(r < rows_);
    return {data_.data() + r * paths_, paths_};
  }

  double& operator()(std::size_t r, std::size_t m) noexcept { return data_[r * paths_ + m]; }
  double operator()(std::size_t r, std::size_t m) const noexcept { return data_[r * paths_ + m]; }

  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const PathField&, const PathField&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t paths_ = 0;
  std::vector<double> data_;
};

}  // namespace qerisk
