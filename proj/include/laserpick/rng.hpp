#pragma once

#include <cstdint>

namespace laserpick {

/// SplitMix64: a 64-bit counter-based generator. The n-th output of the
/// stream (seed, stream) is mix(seed + stream * C1 + (n + 1) * C0) where
/// C0 = 0x9E3779B97F4A7C15 and C1 = 0xD1B54A32D192ED03, and mix is the
/// SplitMix64 finalizer. Every derived quantity below uses only integer
/// arithmetic or exactly rounded IEEE operations, so streams agree across
/// platforms and languages.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamStride = 0xD1B54A32D192ED03ULL;

  explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : state_(seed + stream * kStreamStride) {}

  std::uint64_t next() noexcept {
    state_ += kGamma;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], by multiply-shift on 32 high bits.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t draw = next() >> 32;
    return lo + static_cast<std::int64_t>((draw * span) >> 32);
  }

 private:
  std::uint64_t state_;
};

}  // namespace laserpick
