#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Seeding and variate generation used throughout the library.
//
// Every stochastic routine takes an explicit 64-bit seed and derives
// independent substreams from it with derive_seed(), so results are
// reproducible bit for bit regardless of thread count or platform.
// Variates are generated from raw 64-bit engine output by the inline
// helpers below rather than through std::*_distribution, whose output
// is not pinned down by the standard.

namespace civqr {

// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Collapses (seed, stream, substream) into a single well-mixed seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream = 0,
                                 std::uint64_t substream = 0) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  s = splitmix64(s ^ splitmix64(substream + 0x9e6c63d0876a9a47ULL));
  return s;
}

inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream = 0,
                                     std::uint64_t substream = 0) {
  return std::mt19937_64(derive_seed(seed, stream, substream));
}

// Uniform on the open interval (0,1): maps the top 53 bits to the midpoints
// of a 2^-53 grid, so 0 and 1 are never returned.
inline double uniform01(std::mt19937_64& g) {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
  return lo + uniform01(g) * (hi - lo);
}

// Exponential with the given rate (mean 1/rate).
inline double exponential(std::mt19937_64& g, double rate) {
  return -std::log(uniform01(g)) / rate;
}

// Standard normal via Box-Muller; consumes two uniforms, returns one value.
inline double normal01(std::mt19937_64& g) {
  const double u1 = uniform01(g);
  const double u2 = uniform01(g);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(6.283185307179586476925286766559 * u2);
}

inline double lognormal01(std::mt19937_64& g) { return std::exp(normal01(g)); }

inline bool bernoulli(std::mt19937_64& g, double p) { return uniform01(g) < p; }

// Uniform index in [0, n); n must be positive.
inline std::size_t uniform_index(std::mt19937_64& g, std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform01(g) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

}  // namespace civqr
