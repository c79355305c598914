#pragma once

#include <cmath>
#include <set>

#include "bqldb/crosscat/ensemble.hpp"
#include "bqldb/crosscat/query.hpp"

namespace bqldb::crosscat {

namespace detail {

constexpr std::uint64_t kForeignSourceOffset = 1ull << 32;

// Sources of randomness upstream of a column: its view for a root column;
// the predictor's own noise plus the parents' sources for a foreign column.
inline void column_sources(const State& st, ColumnId c, std::set<std::uint64_t>& out) {
  std::size_t node = 0, pos = 0;
  switch (qdetail::classify(st, c, &node, &pos)) {
    case qdetail::ColKind::root:
      out.insert(st.view_of.at(c));
      return;
    case qdetail::ColKind::foreign_output: {
      if (!out.insert(kForeignSourceOffset + node).second) return;
      for (ColumnId in : st.foreign_nodes[node].spec.inputs)
        column_sources(st, in, out);
      return;
    }
    case qdetail::ColKind::unmodeled:
      throw Error("column " + std::to_string(c) + " is not modeled");
  }
}

// Structural criterion for nonzero mutual information in one member: the
// columns share an upstream source of randomness (same view, or connected
// through foreign predictors). Across views MI is exactly zero, so no
// Monte Carlo threshold is involved.
inline bool structurally_dependent(const State& st, ColumnId a, ColumnId b) {
  if (a == b) return true;
  std::set<std::uint64_t> sa, sb;
  column_sources(st, a, sa);
  column_sources(st, b, sb);
  for (auto s : sa)
    if (sb.count(s)) return true;
  return false;
}

}  // namespace detail

// Ensemble-weighted probability that the mutual information between two
// columns is nonzero. Computed as a ratio of weight sums so that unanimous
// ensembles report exactly 1.0 or 0.0.
inline double dependence_probability(const Ensemble& ens, ColumnId a, ColumnId b) {
  if (a == b) return 1.0;
  ens.check();
  double total = 0.0, dependent = 0.0;
  for (const auto& m : ens.members) {
    total += m.weight;
    if (detail::structurally_dependent(m.state, a, b)) dependent += m.weight;
  }
  return dependent / total;
}

struct MiEstimate {
  double value = 0.0;
  double std_err = 0.0;
};

// Ensemble average of per-member Monte Carlo estimates of the mutual
// information between two columns on a hypothetical row: the divergence of
// the joint from the product of marginals. Members in which the columns are
// structurally independent contribute an exact zero.
inline MiEstimate mutual_information(const Ensemble& ens, ColumnId a, ColumnId b,
                                     std::size_t n, Rng& rng,
                                     const QueryOptions& opts = {}) {
  ens.check();
  if (n < 2) throw Error("mutual_information: need n >= 2 samples");
  double total = 0.0;
  for (const auto& m : ens.members) total += m.weight;

  MiEstimate out;
  double var_acc = 0.0;
  for (const auto& m : ens.members) {
    double w = m.weight / total;
    if (w == 0.0) continue;
    const State& st = m.state;
    if (!detail::structurally_dependent(st, a, b)) continue;  // exact zero

    RowId fresh = st.rows.empty() ? 0 : st.rows.rbegin()->first + 1;
    double sum = 0.0, sumsq = 0.0;
    if (a == b) {
      // self information: entropy of the column's predictive
      auto draws = row_simulate(st, fresh, {}, {a}, n, rng, opts);
      for (const auto& s : draws) {
        double t = -row_logpdf(st, fresh, {}, {{a, s.at(a)}}, rng, opts);
        sum += t;
        sumsq += t * t;
      }
    } else {
      auto draws = row_simulate(st, fresh, {}, {a, b}, n, rng, opts);
      for (const auto& s : draws) {
        double lj = row_logpdf(st, fresh, {}, {{a, s.at(a)}, {b, s.at(b)}}, rng, opts);
        double la = row_logpdf(st, fresh, {}, {{a, s.at(a)}}, rng, opts);
        double lb = row_logpdf(st, fresh, {}, {{b, s.at(b)}}, rng, opts);
        double t = lj - la - lb;
        sum += t;
        sumsq += t * t;
      }
    }
    double mean = sum / double(n);
    double var = std::max(0.0, sumsq / double(n) - mean * mean) / double(n);
    out.value += w * mean;
    var_acc += w * w * var;
  }
  out.std_err = std::sqrt(var_acc);
  return out;
}

// Ensemble-weighted fraction of members in which the two rows share a
// cluster in every view containing a context column; estimates the
// probability that the rows induce identical conditional distributions over
// the context. Empty context defaults to all modeled columns.
inline double row_similarity(const Ensemble& ens, RowId ra, RowId rb,
                             std::vector<ColumnId> context = {}) {
  ens.check();
  if (context.empty())
    for (ColumnId c = 0; c < ens.members[0].state.columns.size(); ++c)
      if (ens.members[0].state.columns[c].type.modeled()) context.push_back(c);
  double total = 0.0, same = 0.0;
  for (const auto& m : ens.members) {
    const State& st = m.state;
    if (!st.rows.count(ra) || !st.rows.count(rb))
      throw Error("row_similarity: unknown row");
    total += m.weight;
    if (ra == rb) {
      same += m.weight;
      continue;
    }
    std::set<ViewId> vids;
    for (ColumnId c : context) {
      std::set<std::uint64_t> sources;
      detail::column_sources(st, c, sources);
      for (auto s : sources)
        if (s < detail::kForeignSourceOffset) vids.insert(ViewId(s));
    }
    bool together = true;
    for (ViewId vid : vids) {
      const View& v = st.views.at(vid);
      together = together && v.assign.at(ra) == v.assign.at(rb);
    }
    if (together) same += m.weight;
  }
  return same / total;
}

// log of the ensemble-averaged predictive density of an observed cell given
// the row's other observed cells (the row's own contribution to the
// sufficient statistics is excluded). Low values flag anomalies.
inline double predictive_probability(const Ensemble& ens, RowId r, ColumnId c, Rng& rng,
                                     const QueryOptions& opts = {}) {
  ens.check();
  const State& first = ens.members[0].state;
  auto it = first.rows.find(r);
  if (it == first.rows.end()) throw Error("predictive_probability: unknown row");
  if (it->second[c].is_missing())
    throw Error("predictive probability needs an observed cell; INFER fills missing ones");

  double total = 0.0;
  for (const auto& m : ens.members) total += m.weight;
  double acc = 0.0;
  for (const auto& m : ens.members) {
    const State& st = m.state;
    const std::vector<Value>& vals = st.rows.at(r);
    std::map<ColumnId, Value> givens;
    for (ColumnId g = 0; g < vals.size(); ++g)
      if (g != c && !vals[g].is_missing() && st.columns[g].type.modeled() &&
          qdetail::classify(st, g, nullptr, nullptr) != qdetail::ColKind::unmodeled)
        givens[g] = vals[g];
    double lp = row_logpdf(st, r, givens, {{c, vals[c]}}, rng, opts);
    acc += (m.weight / total) * std::exp(lp);
  }
  return std::log(acc);
}

}  // namespace bqldb::crosscat
