#pragma once

#include <cstdint>
#include <random>

namespace ccgp {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  return Rng(splitmix64(s));
}

/// Independent stream keyed by (seed, a, b, c). Used to give each episode,
/// epoch, or worker its own reproducible stream regardless of scheduling.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ (a + 0x9e3779b97f4a7c15ULL);
  h = splitmix64(s);
  s = h ^ (b + 0x7f4a7c159e3779b9ULL);
  h = splitmix64(s);
  s = h ^ (c + 0x2545f4914f6cdd1dULL);
  return Rng(splitmix64(s));
}

inline double draw_uniform(Rng& rng) {
  // (0,1); never returns 0 so logs are safe
  return std::uniform_real_distribution<double>(
      std::numeric_limits<double>::min(), 1.0)(rng);
}

inline double draw_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double draw_exponential(Rng& rng) {
  return std::exponential_distribution<double>(1.0)(rng);
}

inline long draw_poisson(Rng& rng, double mean) {
  return std::poisson_distribution<long>(mean)(rng);
}

inline double draw_gamma(Rng& rng, double shape, double rate) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

}  // namespace ccgp
