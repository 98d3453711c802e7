#include "qerisk/random.hpp"

#include <cmath>
#include <numbers>

namespace qerisk {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter c) const noexcept {
  Key k = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

double open_uniform(std::uint32_t hi, std::uint32_t lo) noexcept {
  // 52 bits so that k + 1/2 stays exact; with 53 the top value rounds to 1.
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

double normal_from_block(const Philox4x32::Counter& block) noexcept {
  const double u1 = open_uniform(block[0], block[1]);
  const double u2 = open_uniform(block[2], block[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int32_t poisson_inverse(double mean, double u) noexcept {
  if (mean <= 0.0) return 0;
  double p = std::exp(-mean);
  double cdf = p;
  std::int32_t k = 0;
  // Stops once the pmf underflows; the residual tail mass is below 1e-300.
  while (u > cdf && p > 0.0) {
    ++k;
    p *= mean / k;
    cdf += p;
  }
  return k;
}

Philox4x32::Counter CounterStream::next_block() noexcept {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(position_),
                                static_cast<std::uint32_t>(position_ >> 32), 0xA5A5A5A5u,
                                stream_};
  ++position_;
  return gen_(ctr);
}

double CounterStream::uniform() noexcept {
  if (used_ >= 2) {
    buffer_ = next_block();
    used_ = 0;
  }
  const int offset = 2 * used_++;
  return open_uniform(buffer_[offset], buffer_[offset + 1]);
}

double CounterStream::normal() noexcept { return normal_from_block(next_block()); }

}  // namespace qerisk
