#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bqldb {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

inline double log_gamma(double x) { return std::lgamma(x); }

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// log Gamma(x + k) / Gamma(x), the rising factorial x(x+1)...(x+k-1).
inline double log_rising(double x, double k) {
  return std::lgamma(x + k) - std::lgamma(x);
}

inline double logsumexp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;  // all -inf, or a +inf/nan dominates
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double logsumexp(const std::vector<double>& xs) {
  return logsumexp(std::span<const double>(xs));
}

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // population variance
  std::size_t n = 0;
};

inline MeanVar mean_var(std::span<const double> xs) {
  MeanVar mv;
  mv.n = xs.size();
  if (mv.n == 0) return mv;
  mv.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(mv.n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mv.mean) * (x - mv.mean);
  mv.var = ss / double(mv.n);
  return mv;
}

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  if (q <= 0.0) return xs.front();
  if (q >= 1.0) return xs.back();
  double pos = q * double(xs.size() - 1);
  std::size_t lo = std::size_t(pos);
  double frac = pos - double(lo);
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t k) {
  if (!(lo > 0.0) || !(hi > lo) || k < 2)
    throw std::invalid_argument("log_spaced: need 0 < lo < hi, k >= 2");
  std::vector<double> out(k);
  double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t i = 0; i < k; ++i)
    out[i] = std::exp(llo + (lhi - llo) * double(i) / double(k - 1));
  return out;
}

inline std::vector<double> lin_spaced(double lo, double hi, std::size_t k) {
  if (k < 2) throw std::invalid_argument("lin_spaced: k >= 2");
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i)
    out[i] = lo + (hi - lo) * double(i) / double(k - 1);
  return out;
}

inline double log_normal_pdf(double x, double mean, double sd) {
  if (!(sd > 0.0)) return x == mean ? kPosInf : kNegInf;
  double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.918938533204672742;  // log sqrt(2 pi)
}

// FNV-1a, used for schema compatibility fingerprints.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace bqldb
