#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "ldtm/errors.hpp"

namespace ldtm {

// All randomness in the library flows through this wrapper. The engine
// (mt19937_64) has a fully specified output sequence, and every draw
// transform below is hand-rolled, so a fixed seed gives the same stream on
// every platform and compiler. std::*_distribution is deliberately not used:
// its output is implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection keeps the draw exactly uniform.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw NumericError("uniform_below: n must be positive");
    const std::uint64_t threshold = (-n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  // Index drawn with probability proportional to weights[i].
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw NumericError("categorical: negative or NaN weight");
      total += w;
    }
    if (!(total > 0.0)) throw NumericError("categorical: all weights zero");
    const double u = uniform01() * total;
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) last_positive = i;
      cum += weights[i];
      if (u < cum) return i;
    }
    return last_positive;  // u landed on the rounding edge
  }

  // Standard normal via Marsaglia's polar method, spare value cached.
  double normal01() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Gamma(shape, 1) via Marsaglia-Tsang, with the shape<1 boost.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw NumericError("gamma: shape must be positive");
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal01();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Dirichlet draw; falls back to uniform if every gamma underflows.
  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> out(alpha.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      out[i] = gamma(alpha[i]);
      sum += out[i];
    }
    if (sum <= 0.0) {
      std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
      return out;
    }
    for (double& x : out) x /= sum;
    return out;
  }

  // Fisher-Yates with our own uniform draw; std::shuffle is not portable.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Deterministic fan-out of one top-level seed into per-module streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace ldtm
