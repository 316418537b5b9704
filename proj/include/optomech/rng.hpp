#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace optomech {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// One block = 4 x 32 random bits for a (counter, key) pair; no state is
/// carried between blocks, so streams can be addressed directly.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * counter[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * counter[2];
      counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0],
                 static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1],
                 static_cast<std::uint32_t>(p0)};
    }
    return counter;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Standard normal variates for one trajectory: key = seed, counter =
/// (block index, stream id). Each Philox block yields two doubles in (0,1]
/// and [0,1) that a Box-Muller transform turns into a pair of normals.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream_id)),
        stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {}

  /// Two independent N(0,1) variates.
  std::array<double, 2> pair() noexcept {
    const auto bits = Philox4x32::generate(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         stream_lo_, stream_hi_},
        key_);
    ++block_;
    const std::uint64_t w0 = (static_cast<std::uint64_t>(bits[0]) << 32) | bits[1];
    const std::uint64_t w1 = (static_cast<std::uint64_t>(bits[2]) << 32) | bits[3];
    constexpr double kUnit = 0x1.0p-53;
    const double u1 = static_cast<double>((w0 >> 11) + 1) * kUnit;  // (0, 1]
    const double u2 = static_cast<double>(w1 >> 11) * kUnit;        // [0, 1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  std::uint64_t blocks_used() const noexcept { return block_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
};

}  // namespace optomech
