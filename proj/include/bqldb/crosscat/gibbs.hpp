#pragma once

#include <optional>

#include "bqldb/crosscat/density.hpp"
#include "bqldb/crosscat/state.hpp"

namespace bqldb::crosscat {

enum class TransitionKind { rows, columns, parameters, hyperparameters, foreign_predictors };

struct TransitionScope {
  std::optional<ViewId> view;         // rows kind: restrict to one view
  std::optional<std::size_t> predictor;  // foreign kind: restrict to one node
};

namespace detail {

struct RowConditional {
  std::vector<ClusterId> ids;  // last entry is the fresh cluster
  std::vector<double> logw;    // unnormalized Gibbs conditional
};

// Conditional over cluster assignments for a row that has been removed from
// its view: existing clusters weighted by size times predictive, plus one
// fresh cluster weighted by the concentration times the prior predictive.
inline RowConditional row_conditional(const State& st, const View& v,
                                      const std::vector<Value>& values) {
  RowConditional rc;
  for (const auto& [cid, cl] : v.clusters) {
    double lw = std::log(double(cl.size));
    for (ColumnId c : v.cols)
      if (!values[c].is_missing()) lw += st.col_log_predictive(c, cl.stats.at(c), values[c]);
    rc.ids.push_back(cid);
    rc.logw.push_back(lw);
  }
  double lw = std::log(v.row_alpha);
  for (ColumnId c : v.cols)
    if (!values[c].is_missing())
      lw += st.col_log_predictive(c, empty_stats(st.columns[c].hypers), values[c]);
  rc.ids.push_back(v.next_cluster);
  rc.logw.push_back(lw);
  return rc;
}

// Collapsed Gibbs reassignment of one row within one view (Neal's
// algorithm 3): candidates are the non-empty clusters plus one fresh cluster.
inline void row_step(State& st, View& v, RowId r) {
  const std::vector<Value>& values = st.rows.at(r);
  ClusterId old = v.assign.at(r);
  {
    Cluster& cl = v.clusters.at(old);
    for (ColumnId c : v.cols)
      if (!values[c].is_missing())
        stats_remove(cl.stats.at(c), st.modeling_value(c, values[c]));
    cl.size -= 1;
    if (cl.size == 0) v.clusters.erase(old);
  }
  RowConditional rc = row_conditional(st, v, values);
  const auto& ids = rc.ids;
  const auto& logw = rc.logw;
  ClusterId chosen = ids[st.rng.categorical_log(logw)];
  if (!v.clusters.count(chosen)) {
    Cluster cl;
    for (ColumnId c : v.cols) cl.stats[c] = empty_stats(st.columns[c].hypers);
    v.clusters.emplace(chosen, std::move(cl));
    v.next_cluster = chosen + 1;
  }
  Cluster& cl = v.clusters.at(chosen);
  cl.size += 1;
  v.assign[r] = chosen;
  for (ColumnId c : v.cols)
    if (!values[c].is_missing()) stats_add(cl.stats.at(c), st.modeling_value(c, values[c]));
}

// Marginal likelihood of one column's data grouped by a row partition.
inline double column_ml_under(const State& st, ColumnId c,
                              const std::map<RowId, ClusterId>& assign) {
  std::map<ClusterId, Stats> stats;
  for (const auto& [r, cid] : assign) {
    const Value& x = st.rows.at(r)[c];
    if (x.is_missing()) continue;
    auto it = stats.find(cid);
    if (it == stats.end()) it = stats.emplace(cid, empty_stats(st.columns[c].hypers)).first;
    stats_add(it->second, st.modeling_value(c, x));
  }
  double ml = 0.0;
  for (const auto& [_, s] : stats) ml += log_marginal(st.columns[c].hypers, s);
  return ml;
}

struct PartitionSkeleton {
  double row_alpha = 1.0;
  std::map<RowId, ClusterId> assign;
};

inline PartitionSkeleton prior_partition(State& st) {
  PartitionSkeleton p;
  p.row_alpha = st.opts.fixed_row_alpha ? *st.opts.fixed_row_alpha : st.rng.gamma(1.0, 1.0);
  std::map<ClusterId, std::int64_t> sizes;
  ClusterId next = 0;
  for (const auto& [r, _] : st.rows) {
    std::vector<ClusterId> ids;
    std::vector<double> w;
    for (auto& [cid, n] : sizes) {
      ids.push_back(cid);
      w.push_back(double(n));
    }
    ids.push_back(next);
    w.push_back(p.row_alpha);
    ClusterId chosen = ids[st.rng.categorical(w)];
    if (!sizes.count(chosen)) {
      sizes[chosen] = 0;
      next = chosen + 1;
    }
    sizes[chosen] += 1;
    p.assign[r] = chosen;
  }
  return p;
}

// View reassignment of one must-link unit of columns, with auxiliary fresh
// views drawn from the prior (Neal's algorithm 8 over the view partition;
// block weights are the CRP restated over parties). Views containing a
// cannot-link partner get zero weight.
inline void column_step(State& st, const std::vector<ColumnId>& unit, std::size_t m_aux = 3) {
  ViewId v0 = st.view_of.at(unit[0]);
  double s = double(unit.size());
  bool emptied = st.views.at(v0).cols.size() == unit.size();

  struct Candidate {
    bool fresh;
    ViewId existing;
    PartitionSkeleton skel;
  };
  std::vector<Candidate> cands;
  std::vector<double> logw;

  for (auto& [vid, v] : st.views) {
    if (vid == v0 && emptied) continue;
    if (vid != v0 && !st.unit_allowed_in_view(unit, v)) continue;
    double base = double(v.cols.size()) - (vid == v0 ? s : 0.0);
    double lw = log_rising(base, s);
    for (ColumnId c : unit) lw += column_ml_under(st, c, v.assign);
    cands.push_back({false, vid, {}});
    logw.push_back(lw);
  }
  double aux_base = std::log(st.col_alpha) + std::lgamma(s) - std::log(double(m_aux));
  for (std::size_t j = 0; j < m_aux; ++j) {
    PartitionSkeleton skel;
    if (j == 0 && emptied) {
      const View& v = st.views.at(v0);
      skel.row_alpha = v.row_alpha;
      skel.assign = v.assign;
    } else {
      skel = prior_partition(st);
    }
    double lw = aux_base;
    for (ColumnId c : unit) lw += column_ml_under(st, c, skel.assign);
    cands.push_back({true, 0, std::move(skel)});
    logw.push_back(lw);
  }

  std::size_t pick = st.rng.categorical_log(logw);
  const Candidate& chosen = cands[pick];
  if (!chosen.fresh && chosen.existing == v0) return;
  if (chosen.fresh && emptied && pick == cands.size() - m_aux) return;  // kept own view

  for (ColumnId c : unit) st.detach_column(c);
  ViewId target;
  if (chosen.fresh) {
    target = st.next_view;
    View v;
    v.row_alpha = chosen.skel.row_alpha;
    v.assign = chosen.skel.assign;
    for (const auto& [r, cid] : v.assign) {
      auto it = v.clusters.find(cid);
      if (it == v.clusters.end()) it = v.clusters.emplace(cid, Cluster{}).first;
      it->second.size += 1;
      v.next_cluster = std::max(v.next_cluster, ClusterId(cid + 1));
    }
    st.views.emplace(target, std::move(v));
    st.next_view = target + 1;
  } else {
    target = chosen.existing;
  }
  for (ColumnId c : unit) st.attach_column(c, target);
}

inline std::vector<double> alpha_grid(std::size_t n) {
  double m = double(std::max<std::size_t>(n, 2));
  return log_spaced(1.0 / (2.0 * m), 2.0 * m, kGridPoints);
}

// Grid Gibbs over each hyperparameter axis under a uniform grid prior, then
// over both concentration levels under their Exp(1) prior.
inline void hyper_step(State& st) {
  for (ColumnId c = 0; c < st.columns.size(); ++c) {
    ColumnState& cs = st.columns[c];
    if (!cs.crosscat_modeled || cs.hypers_fixed) continue;
    const View& v = st.views.at(st.view_of.at(c));
    for (std::size_t a = 0; a < cs.grid.axes.size(); ++a) {
      const auto& vals = cs.grid.axes[a].values;
      std::vector<double> logw(vals.size());
      Hypers h = cs.hypers;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        set_axis(h, a, vals[i]);
        double lw = 0.0;
        for (const auto& [_, cl] : v.clusters) lw += log_marginal(h, cl.stats.at(c));
        logw[i] = lw;
      }
      set_axis(cs.hypers, a, vals[st.rng.categorical_log(logw)]);
    }
  }

  if (!st.opts.fixed_col_alpha && !st.view_of.empty()) {
    std::vector<std::int64_t> sizes;
    for (const auto& [_, v] : st.views) sizes.push_back(std::int64_t(v.cols.size()));
    auto grid = alpha_grid(st.view_of.size());
    std::vector<double> logw(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      logw[i] = -grid[i] + crp_log_prob(sizes, grid[i]);
    st.col_alpha = grid[st.rng.categorical_log(logw)];
  }
  if (!st.opts.fixed_row_alpha) {
    for (auto& [_, v] : st.views) {
      if (v.assign.empty()) continue;
      std::vector<std::int64_t> sizes;
      for (const auto& [__, cl] : v.clusters) sizes.push_back(cl.size);
      auto grid = alpha_grid(v.assign.size());
      std::vector<double> logw(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i)
        logw[i] = -grid[i] + crp_log_prob(sizes, grid[i]);
      v.row_alpha = grid[st.rng.categorical_log(logw)];
    }
  }
}

// Refit each foreign predictor against the current imputations of its
// parents: observed parents are used as-is, missing crosscat parents draw
// from the row's current cluster predictive, missing foreign parents draw
// from the (already refit) upstream predictor.
inline void foreign_step(State& st, std::optional<std::size_t> which) {
  if (which && *which >= st.foreign_nodes.size())
    throw Error("foreign transition: no such predictor");
  auto order = foreign::topo_order([&] {
    std::vector<foreign::ForeignSpec> specs;
    for (const auto& fn : st.foreign_nodes) specs.push_back(fn.spec);
    return specs;
  }());

  // per-row resolved values for this pass (observed or imputed)
  std::map<RowId, std::map<ColumnId, Value>> resolved;
  auto resolve_crosscat = [&](RowId r, ColumnId c) -> Value {
    const Value& obs = st.rows.at(r)[c];
    if (!obs.is_missing()) return obs;
    auto& cache = resolved[r];
    if (auto it = cache.find(c); it != cache.end()) return it->second;
    const View& v = st.views.at(st.view_of.at(c));
    const Cluster& cl = v.clusters.at(v.assign.at(r));
    Value draw = st.col_sample_predictive(c, cl.stats.at(c), st.rng);
    cache[c] = draw;
    return draw;
  };

  for (std::size_t idx : order) {
    if (which && idx != *which) continue;
    ForeignNode& fn = st.foreign_nodes[idx];
    std::vector<std::pair<std::vector<Value>, std::vector<Value>>> pairs;
    for (const auto& [r, vals] : st.rows) {
      std::vector<Value> outs;
      bool complete = true;
      for (ColumnId c : fn.spec.outputs) {
        if (vals[c].is_missing()) {
          complete = false;
          break;
        }
        outs.push_back(vals[c]);
      }
      if (!complete) continue;
      std::vector<Value> ins;
      for (ColumnId c : fn.spec.inputs) {
        if (!vals[c].is_missing()) {
          ins.push_back(vals[c]);
        } else if (st.view_of.count(c)) {
          ins.push_back(resolve_crosscat(r, c));
        } else {
          auto& cache = resolved[r];
          auto it = cache.find(c);
          if (it != cache.end()) {
            ins.push_back(it->second);
          } else {
            complete = false;  // upstream output imputation not cached; skip row
            break;
          }
        }
      }
      if (!complete) continue;
      for (std::size_t k = 0; k < fn.spec.outputs.size(); ++k)
        resolved[r][fn.spec.outputs[k]] = outs[k];
      pairs.emplace_back(std::move(ins), std::move(outs));
    }
    if (pairs.size() >= 2) fn.model->fit(pairs);

    // impute this node's missing outputs so downstream nodes can train
    for (const auto& [r, vals] : st.rows) {
      bool need = false;
      for (ColumnId c : fn.spec.outputs)
        if (vals[c].is_missing() && !resolved[r].count(c)) need = true;
      if (!need) continue;
      std::vector<Value> ins;
      bool ok = true;
      for (ColumnId c : fn.spec.inputs) {
        if (!vals[c].is_missing()) {
          ins.push_back(vals[c]);
        } else if (st.view_of.count(c)) {
          ins.push_back(resolve_crosscat(r, c));
        } else if (auto it = resolved[r].find(c); it != resolved[r].end()) {
          ins.push_back(it->second);
        } else {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      auto draw = fn.model->simulate(ins, st.rng);
      for (std::size_t k = 0; k < fn.spec.outputs.size(); ++k) {
        ColumnId c = fn.spec.outputs[k];
        if (vals[c].is_missing()) resolved[r][c] = draw[k];
        else resolved[r][c] = vals[c];
      }
    }
  }
}

}  // namespace detail

inline void transition(State& st, TransitionKind kind, const TransitionScope& scope = {},
                       std::size_t steps = 1) {
  if (scope.view && !st.views.count(*scope.view))
    throw Error("transition: no such view");
  for (std::size_t step = 0; step < steps; ++step) {
    switch (kind) {
      case TransitionKind::rows:
        for (auto& [vid, v] : st.views) {
          if (scope.view && vid != *scope.view) continue;
          std::vector<RowId> rs;
          for (const auto& [r, _] : v.assign) rs.push_back(r);
          for (RowId r : rs) detail::row_step(st, v, r);
        }
        break;
      case TransitionKind::columns:
        for (const auto& unit : st.column_units()) detail::column_step(st, unit);
        break;
      case TransitionKind::parameters:
        // component parameters are collapsed; explicit draws exist only
        // transiently inside simulate, so there is nothing to refresh
        break;
      case TransitionKind::hyperparameters:
        detail::hyper_step(st);
        break;
      case TransitionKind::foreign_predictors:
        detail::foreign_step(st, scope.predictor);
        break;
    }
  }
}

// One systematic scan: every column unit, every row in every view, the
// hyperparameter sweep, then the foreign sweep. The ANALYZE default.
inline void sweep(State& st) {
  transition(st, TransitionKind::columns);
  transition(st, TransitionKind::rows);
  transition(st, TransitionKind::hyperparameters);
  if (!st.foreign_nodes.empty()) transition(st, TransitionKind::foreign_predictors);
  ++st.sweeps;
}

}  // namespace bqldb::crosscat
