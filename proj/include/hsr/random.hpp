#pragma once
// Seeded randomness. Every random quantity in a drop derives from one 64-bit
// seed so runs are reproducible independent of scheduling.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <random>

namespace hsr {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t bits_of(double v) noexcept {
  if (v == 0.0) v = 0.0;  // fold -0.0 onto +0.0
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof u);
  return u;
}

/// Order-sensitive mix of a list of words into one seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (auto w : words) h = splitmix64(h ^ splitmix64(w));
  return h;
}

/// Circular complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_normal(Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5 * variance));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace hsr
