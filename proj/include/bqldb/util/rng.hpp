#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bqldb/util/math.hpp"

namespace bqldb {

// Deterministic RNG. All samplers are implemented from raw mt19937_64 output
// so that streams are reproducible across standard libraries; std::*_distribution
// is never used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0, 1).
  double uniform01() {
    return (double(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n == 0");
    // rejection to avoid modulo bias
    std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    double u1 = uniform01();
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    return mean + sd * z;
  }

  // Gamma by Marsaglia-Tsang; `scale` is the scale parameter (mean = shape*scale).
  double gamma(double shape, double scale = 1.0) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw std::invalid_argument("gamma: shape and scale must be positive");
    if (shape < 1.0) {
      double u = uniform01();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  double student_t(double df) {
    double z = normal();
    double g = gamma(df / 2.0, 2.0 / df);
    return z / std::sqrt(g);
  }

  // Exact Poisson sampling. Product method for small means, inverse-CDF walk
  // outward from the mode otherwise (order of accumulation is fixed, so the
  // stream is reproducible).
  std::int64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
      double limit = std::exp(-mean);
      double prod = uniform01();
      std::int64_t k = 0;
      while (prod > limit) {
        prod *= uniform01();
        ++k;
      }
      return k;
    }
    double u = uniform01();
    std::int64_t mode = std::int64_t(mean);
    double log_pmode = double(mode) * std::log(mean) - mean - std::lgamma(double(mode) + 1.0);
    double p_mode = std::exp(log_pmode);
    double acc = p_mode;
    if (u <= acc) return mode;
    double p_up = p_mode;
    double p_dn = p_mode;
    std::int64_t up = mode, dn = mode;
    while (dn > 0 || p_up > 0.0) {
      if (p_up > 0.0) {
        ++up;
        p_up *= mean / double(up);
        acc += p_up;
        if (u <= acc) return up;
      }
      if (dn > 0) {
        p_dn *= double(dn) / mean;
        --dn;
        acc += p_dn;
        if (u <= acc) return dn;
      }
      if (p_up < 1e-300 && (dn == 0 || p_dn < 1e-300)) break;
    }
    return mode;  // numerically exhausted tail
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Index sampled proportionally to exp(logw). Throws if all weights are -inf.
  std::size_t categorical_log(std::span<const double> logw) {
    double z = logsumexp(logw);
    if (z == kNegInf)
      throw std::runtime_error("categorical_log: all weights are zero");
    double u = uniform01();
    double acc = 0.0;
    std::size_t last = 0;
    bool seen = false;
    for (std::size_t i = 0; i < logw.size(); ++i) {
      if (logw[i] == kNegInf) continue;
      acc += std::exp(logw[i] - z);
      last = i;
      seen = true;
      if (u <= acc) return i;
    }
    if (!seen) throw std::runtime_error("categorical_log: empty support");
    return last;
  }

  std::size_t categorical(std::span<const double> w) {
    double total = 0.0;
    for (double x : w) {
      if (x < 0.0) throw std::invalid_argument("categorical: negative weight");
      total += x;
    }
    if (!(total > 0.0)) throw std::runtime_error("categorical: zero total weight");
    double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (u <= acc && w[i] > 0.0) return i;
    }
    for (std::size_t i = w.size(); i > 0; --i)
      if (w[i - 1] > 0.0) return i - 1;
    throw std::runtime_error("categorical: unreachable");
  }

  std::string serialize() const {
    std::ostringstream os;
    os << gen_;
    return os.str();
  }

  void restore(const std::string& s) {
    std::istringstream is(s);
    is >> gen_;
    if (is.fail()) throw std::runtime_error("Rng::restore: bad state string");
  }

 private:
  std::mt19937_64 gen_;
  std::uint64_t seed_;
};

// splitmix64 step, used to derive independent child seeds from a parent seed
// plus a stable key.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (key + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2) {
  return mix_seed(mix_seed(seed, k1), k2);
}

}  // namespace bqldb
