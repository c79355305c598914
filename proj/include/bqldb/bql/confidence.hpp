#pragma once

#include <cmath>
#include <vector>

#include "bqldb/crosscat/component.hpp"
#include "bqldb/util/math.hpp"
#include "bqldb/util/rng.hpp"

namespace bqldb::bql {

struct DpSummary {
  double point = 0.0;       // mean of the dominant mixture component
  double confidence = 0.0;  // mass of that component
};

// Unimodal summary of a continuous predictive sample: fit a Dirichlet
// process mixture of Gaussians to the draws by collapsed Gibbs sampling and
// report the largest component's mean and mass. The point estimate carries
// confidence pi_max: how much of the predictive mass a single mode captures.
inline DpSummary dp_confidence(const std::vector<double>& draws, std::uint64_t seed,
                               std::size_t gibbs_sweeps = 120) {
  if (draws.size() < 2) throw Error("dp_confidence: need at least 2 draws");
  auto mv = mean_var(std::span<const double>(draws));
  double sd = std::sqrt(mv.var);
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mv.mean))))
    return {mv.mean, 1.0};  // degenerate: all draws (numerically) identical

  std::vector<double> xs(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) xs[i] = (draws[i] - mv.mean) / sd;

  const double crp_alpha = 1.0;
  crosscat::NormalGammaHypers hy{0.0, 0.01, 1.0, 0.1};
  crosscat::Hypers hypers = hy;

  Rng rng(seed);
  std::size_t n = xs.size();
  std::vector<std::size_t> assign(n, 0);
  std::map<std::size_t, crosscat::Stats> clusters;
  std::map<std::size_t, std::int64_t> sizes;
  clusters[0] = crosscat::empty_stats(hypers);
  sizes[0] = std::int64_t(n);
  for (double x : xs) crosscat::stats_add(clusters[0], x);
  std::size_t next_cluster = 1;

  for (std::size_t sweep_i = 0; sweep_i < gibbs_sweeps; ++sweep_i) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t old = assign[i];
      crosscat::stats_remove(clusters[old], xs[i]);
      if (--sizes[old] == 0) {
        clusters.erase(old);
        sizes.erase(old);
      }
      std::vector<std::size_t> ids;
      std::vector<double> logw;
      for (auto& [cid, st] : clusters) {
        ids.push_back(cid);
        logw.push_back(std::log(double(sizes[cid])) +
                       crosscat::log_predictive(hypers, st, xs[i]));
      }
      ids.push_back(next_cluster);
      logw.push_back(std::log(crp_alpha) + crosscat::log_predictive(
                                               hypers, crosscat::empty_stats(hypers), xs[i]));
      std::size_t chosen = ids[rng.categorical_log(logw)];
      if (!clusters.count(chosen)) {
        clusters[chosen] = crosscat::empty_stats(hypers);
        sizes[chosen] = 0;
        next_cluster = chosen + 1;
      }
      crosscat::stats_add(clusters[chosen], xs[i]);
      ++sizes[chosen];
      assign[i] = chosen;
    }
  }

  std::size_t best = 0;
  std::int64_t best_n = -1;
  for (auto& [cid, m] : sizes)
    if (m > best_n) {
      best_n = m;
      best = cid;
    }
  const auto& st = std::get<crosscat::NumericStats>(clusters.at(best));
  double post_mean = (hy.kappa * hy.mean + st.sum) / (hy.kappa + double(st.n));
  return {mv.mean + sd * post_mean, double(best_n) / double(n)};
}

}  // namespace bqldb::bql
