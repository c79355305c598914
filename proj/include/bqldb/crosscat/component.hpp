#pragma once

#include <cmath>
#include <cstdint>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bqldb/core/value.hpp"
#include "bqldb/util/math.hpp"
#include "bqldb/util/rng.hpp"

namespace bqldb::crosscat {

// Conjugate component families, fully collapsed: component parameters are
// integrated out analytically, so predictives and cluster marginals are
// closed-form functions of the hyperparameters and sufficient statistics.

struct BetaBernoulliHypers {
  double alpha = 1.0;  // pseudo-count of ones
  double beta = 1.0;   // pseudo-count of zeros
};

struct BernoulliStats {
  std::int64_t n = 0;
  std::int64_t ones = 0;
};

struct CategoricalHypers {
  double alpha = 1.0;  // symmetric concentration
  std::uint32_t k = 2;
};

struct CategoricalStats {
  std::int64_t n = 0;
  std::vector<std::int64_t> counts;
};

struct NormalGammaHypers {
  double mean = 0.0;   // prior location
  double kappa = 1.0;  // pseudo-observations pinning the location
  double shape = 1.0;  // precision shape
  double rate = 1.0;   // precision rate
};

struct NumericStats {
  std::int64_t n = 0;
  double sum = 0.0;
  double sumsq = 0.0;
};

struct PoissonGammaHypers {
  double shape = 1.0;
  double rate = 1.0;
};

struct CountStats {
  std::int64_t n = 0;
  std::int64_t sum = 0;
  double sum_log_fact = 0.0;  // sum of log(x_i!)
};

using Hypers = std::variant<BetaBernoulliHypers, CategoricalHypers, NormalGammaHypers,
                            PoissonGammaHypers>;
using Stats =
    std::variant<BernoulliStats, CategoricalStats, NumericStats, CountStats>;

inline void check_hypers(const Hypers& h) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BetaBernoulliHypers>) {
          if (!(v.alpha > 0.0) || !(v.beta > 0.0))
            throw Error("beta-bernoulli hyperparameters must be positive");
        } else if constexpr (std::is_same_v<T, CategoricalHypers>) {
          if (!(v.alpha > 0.0) || v.k == 0)
            throw Error("dirichlet-multinomial hyperparameters must be positive");
        } else if constexpr (std::is_same_v<T, NormalGammaHypers>) {
          if (!(v.kappa > 0.0) || !(v.shape > 0.0) || !(v.rate > 0.0))
            throw Error("normal-gamma hyperparameters must be positive");
        } else {
          if (!(v.shape > 0.0) || !(v.rate > 0.0))
            throw Error("poisson-gamma hyperparameters must be positive");
        }
      },
      h);
}

inline Stats empty_stats(const Hypers& h) {
  return std::visit(
      [](const auto& v) -> Stats {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BetaBernoulliHypers>) return BernoulliStats{};
        else if constexpr (std::is_same_v<T, CategoricalHypers>)
          return CategoricalStats{0, std::vector<std::int64_t>(v.k, 0)};
        else if constexpr (std::is_same_v<T, NormalGammaHypers>) return NumericStats{};
        else return CountStats{};
      },
      h);
}

inline void stats_add(Stats& s, double x) {
  std::visit(
      [&](auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BernoulliStats>) {
          ++v.n;
          v.ones += std::int64_t(x);
        } else if constexpr (std::is_same_v<T, CategoricalStats>) {
          ++v.n;
          v.counts.at(std::size_t(x)) += 1;
        } else if constexpr (std::is_same_v<T, NumericStats>) {
          ++v.n;
          v.sum += x;
          v.sumsq += x * x;
        } else {
          ++v.n;
          v.sum += std::int64_t(x);
          v.sum_log_fact += std::lgamma(x + 1.0);
        }
      },
      s);
}

inline void stats_remove(Stats& s, double x) {
  std::visit(
      [&](auto& v) {
        using T = std::decay_t<decltype(v)>;
        if (v.n <= 0) throw Error("stats_remove from empty statistics");
        if constexpr (std::is_same_v<T, BernoulliStats>) {
          --v.n;
          v.ones -= std::int64_t(x);
        } else if constexpr (std::is_same_v<T, CategoricalStats>) {
          --v.n;
          v.counts.at(std::size_t(x)) -= 1;
        } else if constexpr (std::is_same_v<T, NumericStats>) {
          --v.n;
          v.sum -= x;
          v.sumsq -= x * x;
          if (v.n == 0) {
            v.sum = 0.0;
            v.sumsq = 0.0;
          }
        } else {
          --v.n;
          v.sum -= std::int64_t(x);
          v.sum_log_fact -= std::lgamma(x + 1.0);
          if (v.n == 0) v.sum_log_fact = 0.0;
        }
      },
      s);
}

inline std::int64_t stats_count(const Stats& s) {
  return std::visit([](const auto& v) { return v.n; }, s);
}

namespace detail {

struct NormalGammaPosterior {
  double mean, kappa, shape, rate;
};

inline NormalGammaPosterior ng_posterior(const NormalGammaHypers& h,
                                         const NumericStats& s) {
  if (s.n == 0) return {h.mean, h.kappa, h.shape, h.rate};
  double n = double(s.n);
  double xbar = s.sum / n;
  double ss = std::max(0.0, s.sumsq - s.sum * s.sum / n);  // sum (x - xbar)^2
  double kappa_n = h.kappa + n;
  double mean_n = (h.kappa * h.mean + s.sum) / kappa_n;
  double shape_n = h.shape + 0.5 * n;
  double rate_n = h.rate + 0.5 * ss +
                  h.kappa * n * (xbar - h.mean) * (xbar - h.mean) / (2.0 * kappa_n);
  return {mean_n, kappa_n, shape_n, rate_n};
}

inline double student_t_logpdf(double x, double df, double loc, double scale2) {
  double z2 = (x - loc) * (x - loc) / scale2;
  return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
         0.5 * std::log(df * 3.14159265358979323846 * scale2) -
         0.5 * (df + 1.0) * std::log1p(z2 / df);
}

}  // namespace detail

// Log posterior predictive density/mass of one observation given the
// sufficient statistics already absorbed into the component.
inline double log_predictive(const Hypers& h, const Stats& s, double x) {
  if (std::holds_alternative<BetaBernoulliHypers>(h)) {
    const auto& hy = std::get<BetaBernoulliHypers>(h);
    const auto& st = std::get<BernoulliStats>(s);
    double denom = hy.alpha + hy.beta + double(st.n);
    double p1 = (hy.alpha + double(st.ones)) / denom;
    return std::log(x > 0.5 ? p1 : 1.0 - p1);
  }
  if (std::holds_alternative<CategoricalHypers>(h)) {
    const auto& hy = std::get<CategoricalHypers>(h);
    const auto& st = std::get<CategoricalStats>(s);
    std::size_t j = std::size_t(x);
    if (j >= st.counts.size()) return kNegInf;
    return std::log((hy.alpha + double(st.counts[j])) /
                    (hy.alpha * double(hy.k) + double(st.n)));
  }
  if (std::holds_alternative<NormalGammaHypers>(h)) {
    const auto& hy = std::get<NormalGammaHypers>(h);
    const auto& st = std::get<NumericStats>(s);
    auto p = detail::ng_posterior(hy, st);
    double df = 2.0 * p.shape;
    double scale2 = p.rate * (p.kappa + 1.0) / (p.shape * p.kappa);
    return detail::student_t_logpdf(x, df, p.mean, scale2);
  }
  const auto& hy = std::get<PoissonGammaHypers>(h);
  const auto& st = std::get<CountStats>(s);
  double a = hy.shape + double(st.sum);
  double b = hy.rate + double(st.n);
  if (x < 0.0) return kNegInf;
  return std::lgamma(a + x) - std::lgamma(a) - std::lgamma(x + 1.0) +
         a * std::log(b / (b + 1.0)) - x * std::log(b + 1.0);
}

// Log marginal likelihood of all data absorbed into the component
// (parameters integrated against the prior).
inline double log_marginal(const Hypers& h, const Stats& s) {
  if (stats_count(s) == 0) return 0.0;
  if (std::holds_alternative<BetaBernoulliHypers>(h)) {
    const auto& hy = std::get<BetaBernoulliHypers>(h);
    const auto& st = std::get<BernoulliStats>(s);
    return log_beta(hy.alpha + double(st.ones), hy.beta + double(st.n - st.ones)) -
           log_beta(hy.alpha, hy.beta);
  }
  if (std::holds_alternative<CategoricalHypers>(h)) {
    const auto& hy = std::get<CategoricalHypers>(h);
    const auto& st = std::get<CategoricalStats>(s);
    double out = std::lgamma(hy.alpha * double(hy.k)) -
                 std::lgamma(hy.alpha * double(hy.k) + double(st.n));
    for (auto c : st.counts)
      out += std::lgamma(hy.alpha + double(c)) - std::lgamma(hy.alpha);
    return out;
  }
  if (std::holds_alternative<NormalGammaHypers>(h)) {
    const auto& hy = std::get<NormalGammaHypers>(h);
    const auto& st = std::get<NumericStats>(s);
    auto p = detail::ng_posterior(hy, st);
    double n = double(st.n);
    return -0.5 * n * std::log(2.0 * 3.14159265358979323846) + std::lgamma(p.shape) -
           std::lgamma(hy.shape) + hy.shape * std::log(hy.rate) -
           p.shape * std::log(p.rate) + 0.5 * (std::log(hy.kappa) - std::log(p.kappa));
  }
  const auto& hy = std::get<PoissonGammaHypers>(h);
  const auto& st = std::get<CountStats>(s);
  double a = hy.shape + double(st.sum);
  double b = hy.rate + double(st.n);
  return std::lgamma(a) - std::lgamma(hy.shape) + hy.shape * std::log(hy.rate) -
         a * std::log(b) - st.sum_log_fact;
}

// One draw from the posterior predictive.
inline double sample_predictive(const Hypers& h, const Stats& s, Rng& rng) {
  if (std::holds_alternative<BetaBernoulliHypers>(h)) {
    double p1 = std::exp(log_predictive(h, s, 1.0));
    return rng.bernoulli(p1) ? 1.0 : 0.0;
  }
  if (std::holds_alternative<CategoricalHypers>(h)) {
    const auto& hy = std::get<CategoricalHypers>(h);
    std::vector<double> w(hy.k);
    for (std::uint32_t j = 0; j < hy.k; ++j)
      w[j] = std::exp(log_predictive(h, s, double(j)));
    return double(rng.categorical(w));
  }
  if (std::holds_alternative<NormalGammaHypers>(h)) {
    const auto& hy = std::get<NormalGammaHypers>(h);
    const auto& st = std::get<NumericStats>(s);
    auto p = detail::ng_posterior(hy, st);
    double df = 2.0 * p.shape;
    double scale2 = p.rate * (p.kappa + 1.0) / (p.shape * p.kappa);
    return p.mean + std::sqrt(scale2) * rng.student_t(df);
  }
  const auto& hy = std::get<PoissonGammaHypers>(h);
  const auto& st = std::get<CountStats>(s);
  double a = hy.shape + double(st.sum);
  double b = hy.rate + double(st.n);
  double lambda = rng.gamma(a, 1.0 / b);
  return double(rng.poisson(lambda));
}

inline nlohmann::json hypers_to_json(const Hypers& h) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BetaBernoulliHypers>)
          return {{"family", "beta_bernoulli"}, {"alpha", v.alpha}, {"beta", v.beta}};
        else if constexpr (std::is_same_v<T, CategoricalHypers>)
          return {{"family", "dirichlet_multinomial"}, {"alpha", v.alpha}, {"k", v.k}};
        else if constexpr (std::is_same_v<T, NormalGammaHypers>)
          return {{"family", "normal_gamma"},
                  {"mean", v.mean},
                  {"kappa", v.kappa},
                  {"shape", v.shape},
                  {"rate", v.rate}};
        else
          return {{"family", "poisson_gamma"}, {"shape", v.shape}, {"rate", v.rate}};
      },
      h);
}

inline Hypers hypers_from_json(const nlohmann::json& j) {
  std::string fam = j.at("family").get<std::string>();
  if (fam == "beta_bernoulli")
    return BetaBernoulliHypers{j.at("alpha").get<double>(), j.at("beta").get<double>()};
  if (fam == "dirichlet_multinomial")
    return CategoricalHypers{j.at("alpha").get<double>(), j.at("k").get<std::uint32_t>()};
  if (fam == "normal_gamma")
    return NormalGammaHypers{j.at("mean").get<double>(), j.at("kappa").get<double>(),
                             j.at("shape").get<double>(), j.at("rate").get<double>()};
  if (fam == "poisson_gamma")
    return PoissonGammaHypers{j.at("shape").get<double>(), j.at("rate").get<double>()};
  throw Error("unknown component family '" + fam + "'");
}

}  // namespace bqldb::crosscat
