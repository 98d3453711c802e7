#pragma once

#include <array>
#include <cstdint>

namespace qerisk {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The block function maps a 128-bit counter and a 64-bit key to 128 random
/// bits with no hidden state, so any (path, step, stream) coordinate can be
/// drawn independently of the order in which coordinates are visited.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(Key key) noexcept : key_(key) {}
  explicit constexpr Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter counter) const noexcept;

  const Key& key() const noexcept { return key_; }

 private:
  Key key_;
};

/// Uniform in the open interval (0, 1) from two 32-bit words (52 bits used).
double open_uniform(std::uint32_t hi, std::uint32_t lo) noexcept;

/// Standard normal via Box-Muller from four words of one Philox block.
double normal_from_block(const Philox4x32::Counter& block) noexcept;

/// Poisson(mean) by sequential inversion of a single uniform.
std::int32_t poisson_inverse(double mean, double u) noexcept;

/// Sequential view over a Philox stream: the counter advances by one block
/// per draw. Used by samplers that only need reproducible, seed-addressable
/// sequences (assumption validators, test generators).
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint32_t stream) noexcept
      : gen_(seed), stream_(stream) {}

  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;

 private:
  Philox4x32::Counter next_block() noexcept;

  Philox4x32 gen_;
  std::uint32_t stream_;
  std::uint64_t position_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 2;
};

}  // namespace qerisk
