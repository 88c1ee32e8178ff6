#pragma once

// Counter-based Philox4x32-10 generator. Every draw is a pure function of
// (seed, counter), so streams are reproducible regardless of evaluation order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace inrmri {

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  static constexpr const char* kName = "philox4x32-10";

  explicit constexpr Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr Block operator()(Block ctr) const noexcept {
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = round_(ctr, key);
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

  /// Block for a flat 64-bit counter on a given 32-bit stream.
  constexpr Block block(std::uint64_t counter, std::uint32_t stream = 0) const noexcept {
    return (*this)(Block{static_cast<std::uint32_t>(counter),
                         static_cast<std::uint32_t>(counter >> 32), stream, 0u});
  }

  /// Uniform double in [0, 1) with 53 random bits.
  static constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi >> 5) << 26) | (lo >> 6);
    return static_cast<double>(bits) * 0x1.0p-53;
  }

  double uniform(std::uint64_t counter, std::uint32_t stream = 0) const noexcept {
    const Block b = block(counter, stream);
    return to_unit(b[0], b[1]);
  }

  /// Two independent standard normals (Box-Muller) from one block.
  std::pair<double, double> normal_pair(std::uint64_t counter,
                                        std::uint32_t stream = 0) const noexcept {
    const Block b = block(counter, stream);
    const double u1 = 1.0 - to_unit(b[0], b[1]);  // (0, 1]
    const double u2 = to_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static constexpr Block round_(const Block& c, const std::array<std::uint32_t, 2>& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    return Block{hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  std::array<std::uint32_t, 2> key_;
};

}  // namespace inrmri
