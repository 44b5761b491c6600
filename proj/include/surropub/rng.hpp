#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "surropub/error.hpp"

// Seeded randomness used across the toolkit. Every sampler takes an explicit
// seed; substreams are derived by hashing (seed, stream index) so records and
// runs can be generated independently and in parallel. All draws go through
// uniform01() below rather than std::*_distribution, which keeps outputs
// identical across standard library implementations.
namespace surropub::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51'7c'c1'b7'27'22'0a'95ULL));
}

inline Engine make_engine(std::uint64_t seed) { return Engine(splitmix64(seed)); }

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream) {
  return Engine(derive(seed, stream));
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). n must be positive.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t n) {
  // Rejection sampling over the top multiple of n keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

/// Index draw proportional to nonnegative weights (need not sum to 1).
inline std::size_t discrete(Engine& eng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw Error("discrete draw over zero-mass weights");
  double u = uniform01(eng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return i;
  }
  return weights.size() - 1;
}

inline double gaussian(Engine& eng) {
  // Box-Muller; one value per call so the stream stays position-independent.
  double u1 = uniform01(eng);
  while (u1 <= 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline double laplace(Engine& eng, double scale) {
  const double u = uniform01(eng) - 0.5;
  return -scale * std::copysign(1.0, u) * std::log(1.0 - 2.0 * std::fabs(u));
}

/// Marsaglia-Tsang gamma draw, shape alpha > 0, unit scale.
inline double gamma(Engine& eng, double alpha) {
  if (!(alpha > 0.0)) throw Error("gamma shape must be positive");
  if (alpha < 1.0) {
    const double u = uniform01(eng);
    return gamma(eng, alpha + 1.0) * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = gaussian(eng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform01(eng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline std::vector<double> dirichlet(Engine& eng, std::size_t k, double alpha) {
  std::vector<double> out(k);
  double sum = 0.0;
  for (auto& x : out) {
    x = gamma(eng, alpha);
    sum += x;
  }
  if (sum <= 0.0) {
    for (auto& x : out) x = 1.0 / static_cast<double>(k);
    return out;
  }
  for (auto& x : out) x /= sum;
  return out;
}

/// Fisher-Yates shuffle driven by uniform_below for cross-platform stability.
template <typename T>
void shuffle(Engine& eng, std::vector<T>& items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(eng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace surropub::rng
