#pragma once

// Splittable counter-based random streams.
//
// Every Monte-Carlo replicate draws from its own stream, which is a pure
// function of (master_seed, stream_index). Re-running with the same master
// seed therefore reproduces every replicate bit-for-bit, regardless of
// scheduling order.

#include <cmath>
#include <cstdint>
#include <vector>

namespace levygrow {

// splitmix64 (Vigna, public domain). Passes BigCrush; 64 bits of state.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(scramble(seed)) {}

  // Stream k of a master seed; distinct k give statistically independent
  // streams (splitmix64 applied to a distinct 64-bit tag).
  static Rng stream(std::uint64_t master_seed, std::uint64_t k) {
    std::uint64_t s = master_seed;
    std::uint64_t tag = splitmix64_next(s);
    s = master_seed ^ (0xD1342543DE82EF95ULL * (k + 1));
    return Rng(tag ^ splitmix64_next(s));
  }

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform on (0,1), never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  double normal() {
    // Box-Muller; one value per call keeps replay simple.
    double u1 = uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Poisson: chop-down inversion for small means, Hormann PTRS otherwise.
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      double l = std::exp(-mean);
      long k = 0;
      double prod = uniform();
      while (prod > l) {
        prod *= uniform();
        ++k;
      }
      return k;
    }
    return poisson_ptrs(mean);
  }

  // Gamma(shape, rate), Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  // Uniformly random interleaving positions: choose k slots among n total,
  // returns sorted slot indices in [0, n).
  std::vector<int> sample_slots(int k, int n) {
    std::vector<int> out;
    out.reserve(k);
    int remaining = k;
    for (int i = 0; i < n && remaining > 0; ++i) {
      if (uniform() * (n - i) < remaining) {
        out.push_back(i);
        --remaining;
      }
    }
    return out;
  }

 private:
  static std::uint64_t scramble(std::uint64_t seed) {
    std::uint64_t s = seed;
    splitmix64_next(s);
    return splitmix64_next(s);
  }

  long poisson_ptrs(double mean) {
    // W. Hormann, "The transformed rejection method for generating Poisson
    // random variables" (PTRS).
    double smu = std::sqrt(mean);
    double b = 0.931 + 2.53 * smu;
    double a = -0.059 + 0.02483 * b;
    double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = uniform() - 0.5;
      double v = uniform();
      double us = 0.5 - std::fabs(u);
      long k = static_cast<long>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
      if (us >= 0.07 && v <= v_r) return k;
      if (k < 0 || (us < 0.013 && v > us)) continue;
      double lm = std::log(mean);
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          k * lm - mean - std::lgamma(static_cast<double>(k) + 1.0))
        return k;
    }
  }

  std::uint64_t state_;
};

}  // namespace levygrow
