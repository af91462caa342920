#pragma once

#include <cstdint>
#include <random>

namespace mason {

// splitmix64; used to derive independent per-trial and per-key seeds from a
// master seed without any iteration-order dependence.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
  s ^= b * 0xff51afd7ed558ccdULL;
  return splitmix64(s);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b,
                              std::uint64_t c, std::uint64_t d) {
  return mix_seed(mix_seed(a, b, c), d);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  // one round of mixing so nearby seeds give unrelated streams
  return Rng(splitmix64(s));
}

inline double gaussian(Rng& rng, double mean, double stddev) {
  if (stddev <= 0.0) return mean;
  std::normal_distribution<double> dist(mean, stddev);
  return dist(rng);
}

// A Gaussian draw keyed by (seed, key...) alone; reproducible regardless of
// the order in which draws are requested.
inline double keyed_gaussian(std::uint64_t seed, std::uint64_t key,
                             double mean, double stddev) {
  if (stddev <= 0.0) return mean;
  Rng rng = make_rng(mix_seed(seed, key));
  return gaussian(rng, mean, stddev);
}

}  // namespace mason
