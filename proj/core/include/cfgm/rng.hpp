#pragma once

#include <cmath>
#include <cstdint>

namespace cfgm {

/// Counter-based pseudo-random generator (splitmix64).
///
/// Output k of a stream is a pure function of (state0 + k * GAMMA), so any
/// number of independent streams can be derived from a base seed and a stream
/// id and consumed in any order. Used for data generation (one stream per
/// sample) and for fold/search shuffles (one stream per node).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  /// Derive the initial state for stream `stream_id` under `seed`.
  static std::uint64_t stream(std::uint64_t seed, std::uint64_t stream_id) {
    return scramble(seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1));
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return scramble(state_);
  }

  /// Uniform draw in (0, 1].
  double uniform() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Integer in [0, bound) by rejection-free modulo of the high bits.
  std::uint64_t below(std::uint64_t bound) {
    // 128-bit multiply-shift maps next() uniformly onto [0, bound).
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  static std::uint64_t scramble(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace cfgm
