#pragma once

#include <cmath>

#include "bqldb/crosscat/state.hpp"
#include "bqldb/util/math.hpp"

namespace bqldb::crosscat {

// Probability of a partition with the given block sizes under a CRP:
//   alpha^K * Gamma(alpha) / Gamma(alpha + n) * prod_c Gamma(n_c)
inline double crp_log_prob(const std::vector<std::int64_t>& block_sizes, double alpha) {
  std::int64_t n = 0;
  double lp = 0.0;
  for (auto s : block_sizes) {
    if (s <= 0) throw Error("crp_log_prob: empty block");
    n += s;
    lp += std::lgamma(double(s));
  }
  if (n == 0) return 0.0;
  lp += double(block_sizes.size()) * std::log(alpha);
  lp += std::lgamma(alpha) - std::lgamma(alpha + double(n));
  return lp;
}

inline double view_partition_log_prob(const View& v) {
  std::vector<std::int64_t> sizes;
  for (const auto& [_, cl] : v.clusters) sizes.push_back(cl.size);
  return crp_log_prob(sizes, v.row_alpha);
}

inline double column_partition_log_prob(const State& st) {
  std::vector<std::int64_t> sizes;
  for (const auto& [_, v] : st.views) sizes.push_back(std::int64_t(v.cols.size()));
  if (sizes.empty()) return 0.0;
  return crp_log_prob(sizes, st.col_alpha);
}

// Full joint log density of latents and incorporated data, component
// parameters integrated out:
//
//   Exp(1) densities of both concentration levels
//   * uniform grid mass of each column's hyperparameters
//   * CRP(columns) * prod_views CRP(rows)
//   * prod cluster marginal likelihoods
//   * constraint indicators (violation -> -inf)
//   * prod foreign densities over rows with observed outputs and parents
inline double joint_log_density(const State& st) {
  if (!st.constraints_satisfied()) return kNegInf;

  double lp = -st.col_alpha;  // Gamma(1,1) prior density at col_alpha
  lp += column_partition_log_prob(st);

  for (ColumnId c = 0; c < st.columns.size(); ++c) {
    const ColumnState& cs = st.columns[c];
    if (!cs.crosscat_modeled) continue;
    if (!cs.hypers_fixed) lp += cs.grid.log_prior_mass();
  }

  for (const auto& [vid, v] : st.views) {
    lp += -v.row_alpha + view_partition_log_prob(v);
    for (const auto& [cid, cl] : v.clusters)
      for (ColumnId c : v.cols) lp += log_marginal(st.columns[c].hypers, cl.stats.at(c));
  }

  // log-scale columns: density over raw values includes the Jacobian
  for (const auto& [r, vals] : st.rows)
    for (const auto& [c, vid] : st.view_of)
      if (!vals[c].is_missing()) lp += st.log_jacobian(c, vals[c]);

  for (const auto& fn : st.foreign_nodes) {
    for (const auto& [r, vals] : st.rows) {
      std::vector<std::optional<Value>> outs;
      bool any = false;
      for (ColumnId c : fn.spec.outputs) {
        if (vals[c].is_missing()) {
          outs.emplace_back(std::nullopt);
        } else {
          outs.emplace_back(vals[c]);
          any = true;
        }
      }
      if (!any) continue;
      std::vector<Value> ins;
      bool ok = true;
      for (ColumnId c : fn.spec.inputs) {
        if (vals[c].is_missing()) {
          ok = false;
          break;
        }
        ins.push_back(vals[c]);
      }
      if (ok) lp += fn.model->logpdf(outs, ins);
    }
  }
  return lp;
}

// Spec'd entry point: checks that the state's incorporated data matches the
// store before evaluating.
inline double joint_log_density(const State& st, const MeasurementStore& store) {
  if (store.n_rows() != st.rows.size())
    throw Error("joint_log_density: store and state disagree on rows");
  for (const auto& [r, vals] : st.rows) {
    if (!store.has_row(r)) throw Error("joint_log_density: state row missing from store");
    for (ColumnId c = 0; c < vals.size(); ++c) {
      auto cell = store.get(r, c);
      bool stored = cell.has_value();
      bool incorporated = !vals[c].is_missing();
      if (stored != incorporated || (stored && !(*cell == vals[c])))
        throw Error("joint_log_density: state and store cells differ");
    }
  }
  return joint_log_density(st);
}

}  // namespace bqldb::crosscat
