#pragma once

#include <cmath>
#include <cstdint>

#include "cidlab/common.hpp"

namespace cidlab {

// Counter-based generator (Philox2x64, 10 rounds). Draw i of a stream is a
// pure function of (key, i), so replicates can be farmed out to workers and
// still reproduce bit-for-bit in any execution order. The algorithm name is
// recorded in every run manifest.
inline constexpr const char* kRngAlgorithm = "philox2x64-10";

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

// Derives the key of substream `index` of a master seed. Injective in the
// index for a fixed seed: index -> seed + golden*(index+1) is injective mod
// 2^64 (the multiplier is odd) and mix64 is a bijection.
inline std::uint64_t substream_key(std::uint64_t seed, std::uint64_t index) {
  return detail::mix64(seed + detail::kGolden * (index + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}
  Rng(std::uint64_t seed, std::uint64_t stream_index)
      : key_(substream_key(seed, stream_index)) {}

  std::uint64_t next_u64() {
    if (have_ == 0) fill();
    return buf_[--have_];
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (0,1); safe under log().
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // One standard normal per call via Box-Muller, always consuming exactly two
  // words so the draw count of a routine does not depend on call history.
  double normal() {
    const double u1 = uniform_open01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool coin() { return (next_u64() & 1ull) != 0; }

 private:
  static constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ull;

  void fill() {
    std::uint64_t x0 = ctr_lo_;
    std::uint64_t x1 = ctr_hi_;
    std::uint64_t k = key_;
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 prod =
          static_cast<unsigned __int128>(x0) * kMul;
      const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
      const std::uint64_t lo = static_cast<std::uint64_t>(prod);
      x0 = hi ^ k ^ x1;
      x1 = lo;
      k += detail::kGolden;
    }
    buf_[0] = x0;
    buf_[1] = x1;
    have_ = 2;
    if (++ctr_lo_ == 0) ++ctr_hi_;
  }

  std::uint64_t key_;
  std::uint64_t ctr_lo_ = 0;
  std::uint64_t ctr_hi_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int have_ = 0;
};

// Fixed purpose tags keep the substream tree stable: stream (seed, replicate)
// owns the trajectory, (seed, replicate, purpose) the auxiliary draws.
enum class StreamPurpose : std::uint64_t {
  trajectory = 0,
  directing_proxy = 1,
  martingale_mc = 2,
  identity_search = 3,
  cover_mass = 4,
  doob_mc = 5,
};

inline Rng purpose_rng(std::uint64_t seed, std::uint64_t replicate,
                       StreamPurpose purpose) {
  return Rng(substream_key(seed, replicate),
             static_cast<std::uint64_t>(purpose));
}

}  // namespace cidlab
