#pragma once

#include <cmath>
#include <cstdint>

namespace amm {

/// Counter-based splittable generator built on the SplitMix64 finalizer.
///
/// Every stream is a pure function of (key, counter), so forked substreams
/// are independent of evaluation order and results are identical across
/// platforms and degrees of parallelism. Gaussian draws use Box-Muller with
/// no cached second value, keeping the uniform-consumption count per draw
/// fixed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kKeyTweak)) {}

  /// Derives an independent substream for a stable task index.
  Rng fork(std::uint64_t stream) const {
    Rng child(0);
    child.key_ = mix(key_ ^ mix(stream + kStreamTweak));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1].
  double next_double_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double next_gaussian() {
    const double u1 = next_double_open();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Multiply-shift; bias is negligible for n << 2^64.
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kKeyTweak = 0x5851f42d4c957f2dULL;
  static constexpr std::uint64_t kStreamTweak = 0x14057b7ef767814fULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stable hash used for deriving per-task seeds (e.g. sweep trials).
inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace amm
