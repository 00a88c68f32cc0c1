// Deterministic stream-splitting random number generation.
//
// Every stochastic object in the library (weights, thresholds, noise paths,
// initial conditions, Monte Carlo draws) pulls from its own named stream, so
// that results are reproducible bit-for-bit regardless of evaluation order or
// thread count.  A stream is keyed by (seed, purpose, index): the purpose
// string is hashed with FNV-1a, the three words are mixed through splitmix64,
// and the result seeds an independent mt19937_64.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ratenet {

/// FNV-1a 64-bit hash of a byte string.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

/// One splitmix64 mixing step.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent random stream identified by (seed, purpose, index).
///
/// Gaussian variates use an explicit Box-Muller transform rather than
/// std::normal_distribution so that the byte stream is identical across
/// standard library implementations.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0)
      : gen_(splitmix64(splitmix64(splitmix64(seed) ^ fnv1a64(purpose)) ^ index)) {}

  /// Raw 64-bit word.
  std::uint64_t next_u64() { return gen_(); }

  /// Uniform variate in (0, 1].
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform variate in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal variate (Box-Muller; caches the second leg).
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Packs a network size and a trial counter into one stream index, so that
/// multi-size experiments give every (N, trial) pair its own stream.
constexpr std::uint64_t stream_index(int N, int trial) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(N)) << 20) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(trial));
}

}  // namespace ratenet
