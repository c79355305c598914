#pragma once

#include <map>
#include <set>
#include <vector>

#include "bqldb/crosscat/state.hpp"
#include "bqldb/gpm/interface.hpp"

namespace bqldb::crosscat {

struct QueryOptions {
  std::size_t particles = 256;  // importance samples when foreign columns are involved
};

namespace qdetail {

// Cluster mixture of one view, conditioned within a single row: base weights
// are CRP counts with the row's own membership removed (a fresh row removes
// nothing), reweighted by the conditioning values' predictives. The last
// candidate is the fresh cluster.
struct ViewMix {
  std::vector<double> logw;                      // after conditioning
  double base_lse = 0.0;                         // logsumexp before conditioning
  std::vector<std::map<ColumnId, Stats>> stats;  // involved columns, conds absorbed
};

inline ViewMix make_view_mix(const State& st, ViewId vid, RowId row,
                             const std::map<ColumnId, Value>& conds,
                             const std::set<ColumnId>& needed) {
  const View& v = st.views.at(vid);
  bool inc = v.assign.count(row) != 0;
  ClusterId row_cluster = inc ? v.assign.at(row) : 0;
  const std::vector<Value>* row_vals = inc ? &st.rows.at(row) : nullptr;

  std::vector<ColumnId> involved;
  for (ColumnId c : v.cols)
    if (needed.count(c) || conds.count(c)) involved.push_back(c);

  ViewMix mix;
  std::vector<double> base;
  auto add_candidate = [&](double logw0, const Cluster* cl, bool exclude_row) {
    std::map<ColumnId, Stats> stats;
    for (ColumnId c : involved) {
      Stats s = cl ? cl->stats.at(c) : empty_stats(st.columns[c].hypers);
      if (cl && exclude_row && row_vals && !(*row_vals)[c].is_missing())
        stats_remove(s, st.modeling_value(c, (*row_vals)[c]));
      stats.emplace(c, std::move(s));
    }
    base.push_back(logw0);
    mix.stats.push_back(std::move(stats));
  };

  for (const auto& [cid, cl] : v.clusters) {
    std::int64_t size = cl.size - (inc && cid == row_cluster ? 1 : 0);
    if (size <= 0) continue;
    add_candidate(std::log(double(size)), &cl, inc && cid == row_cluster);
  }
  add_candidate(std::log(v.row_alpha), nullptr, false);

  mix.base_lse = logsumexp(base);
  mix.logw = base;
  for (const auto& [c, val] : conds) {
    if (!v.has_col(c)) continue;
    for (std::size_t k = 0; k < mix.logw.size(); ++k) {
      mix.logw[k] += st.col_log_predictive(c, mix.stats[k].at(c), val);
      stats_add(mix.stats[k].at(c), st.modeling_value(c, val));
    }
  }
  return mix;
}

enum class ColKind { root, foreign_output, unmodeled };

inline ColKind classify(const State& st, ColumnId c, std::size_t* node, std::size_t* pos) {
  if (c >= st.columns.size()) throw Error("unknown column " + std::to_string(c));
  if (st.columns[c].crosscat_modeled) return ColKind::root;
  if (st.columns[c].foreign_owned) {
    for (std::size_t i = 0; i < st.foreign_nodes.size(); ++i) {
      const auto& outs = st.foreign_nodes[i].spec.outputs;
      for (std::size_t k = 0; k < outs.size(); ++k)
        if (outs[k] == c) {
          if (node) *node = i;
          if (pos) *pos = k;
          return ColKind::foreign_output;
        }
    }
  }
  return ColKind::unmodeled;
}

// Root ancestors and foreign intermediaries needed to evaluate/simulate the
// given columns.
inline void ancestor_closure(const State& st, ColumnId c, std::set<ColumnId>& roots,
                             std::set<std::size_t>& nodes) {
  std::size_t node = 0, pos = 0;
  switch (classify(st, c, &node, &pos)) {
    case ColKind::root:
      roots.insert(c);
      return;
    case ColKind::foreign_output:
      if (!nodes.insert(node).second) return;
      for (ColumnId in : st.foreign_nodes[node].spec.inputs)
        ancestor_closure(st, in, roots, nodes);
      return;
    case ColKind::unmodeled:
      throw Error("column " + std::to_string(c) + " is not modeled");
  }
}

// Joint draw of root cells for one row given root conditioning values.
// Values are drawn sequentially inside the sampled cluster so that
// same-cluster cells stay correlated.
inline std::map<ColumnId, Value> draw_root_cells(const State& st, RowId row,
                                                 const std::map<ColumnId, Value>& conds,
                                                 const std::set<ColumnId>& cols, Rng& rng) {
  std::map<ColumnId, Value> out;
  std::set<ViewId> vids;
  for (ColumnId c : cols) vids.insert(st.view_of.at(c));
  for (ViewId vid : vids) {
    ViewMix mix = make_view_mix(st, vid, row, conds, cols);
    if (logsumexp(mix.logw) == kNegInf)
      throw gpm::ConditioningError("conditioning values have zero density");
    std::size_t k = rng.categorical_log(mix.logw);
    for (ColumnId c : cols) {
      if (!st.views.at(vid).has_col(c)) continue;
      Value v = st.col_sample_predictive(c, mix.stats[k].at(c), rng);
      stats_add(mix.stats[k].at(c), st.modeling_value(c, v));
      out[c] = v;
    }
  }
  return out;
}

// log p(root cells) for one row (cells from any number of views).
inline double root_cells_logpdf(const State& st, RowId row,
                                const std::map<ColumnId, Value>& cells) {
  std::set<ViewId> vids;
  for (const auto& [c, _] : cells) vids.insert(st.view_of.at(c));
  double lp = 0.0;
  for (ViewId vid : vids) {
    ViewMix mix = make_view_mix(st, vid, row, cells, {});
    lp += logsumexp(mix.logw) - mix.base_lse;
  }
  return lp;
}

// One importance sample of every unpinned ancestor (root cells and upstream
// foreign outputs), plus the log weight of the pinned foreign cells.
// Root-sampled parents can fall outside a predictor's domain (a predictor
// models a subset of the parent space); such particles carry zero weight,
// and forward draws there are flagged so simulation can resample.
struct Particle {
  std::map<ColumnId, Value> cells;  // pinned and sampled
  double logw = 0.0;
  bool forward_failed = false;
};

inline Particle draw_particle(const State& st, RowId row,
                              const std::map<ColumnId, Value>& pinned,
                              const std::set<ColumnId>& roots_needed,
                              const std::set<std::size_t>& nodes_needed, Rng& rng) {
  Particle p;
  p.cells = pinned;
  std::map<ColumnId, Value> root_conds;
  std::set<ColumnId> roots_missing;
  for (const auto& [c, v] : pinned)
    if (st.columns[c].crosscat_modeled) root_conds[c] = v;
  for (ColumnId c : roots_needed)
    if (!pinned.count(c)) roots_missing.insert(c);
  if (!roots_missing.empty()) {
    auto drawn = draw_root_cells(st, row, root_conds, roots_missing, rng);
    for (auto& [c, v] : drawn) p.cells[c] = v;
  }

  if (nodes_needed.empty()) return p;
  auto order = foreign::topo_order([&] {
    std::vector<foreign::ForeignSpec> specs;
    for (const auto& fn : st.foreign_nodes) specs.push_back(fn.spec);
    return specs;
  }());
  for (std::size_t idx : order) {
    if (!nodes_needed.count(idx)) continue;
    const ForeignNode& fn = st.foreign_nodes[idx];
    std::vector<Value> ins;
    bool upstream_ok = true;
    for (ColumnId c : fn.spec.inputs) {
      auto it = p.cells.find(c);
      if (it == p.cells.end()) {
        upstream_ok = false;  // an upstream forward draw already failed
        break;
      }
      ins.push_back(it->second);
    }
    std::vector<std::optional<Value>> pinned_outs;
    bool any_pinned = false, any_free = false;
    for (ColumnId c : fn.spec.outputs) {
      auto it = p.cells.find(c);
      if (it != p.cells.end()) {
        pinned_outs.emplace_back(it->second);
        any_pinned = true;
      } else {
        pinned_outs.emplace_back(std::nullopt);
        any_free = true;
      }
    }
    if (!upstream_ok) {
      p.logw = kNegInf;
      p.forward_failed = true;
      continue;
    }
    if (any_pinned) {
      try {
        p.logw += fn.model->logpdf(pinned_outs, ins);
      } catch (const Error&) {
        p.logw = kNegInf;  // parents outside the predictor's domain
      }
    }
    if (any_free) {
      try {
        auto draw = fn.model->simulate(ins, rng);
        for (std::size_t k = 0; k < fn.spec.outputs.size(); ++k)
          if (!pinned_outs[k]) p.cells[fn.spec.outputs[k]] = draw[k];
      } catch (const Error&) {
        p.forward_failed = true;
        p.logw = kNegInf;
      }
    }
  }
  return p;
}

// Monte Carlo log p(cells) for a mixed set of root and foreign cells:
// exact root factor times the mean foreign likelihood over particles.
inline double mixed_cells_logpdf(const State& st, RowId row,
                                 const std::map<ColumnId, Value>& cells,
                                 std::size_t particles, Rng& rng) {
  std::map<ColumnId, Value> root_cells;
  std::set<ColumnId> roots_needed;
  std::set<std::size_t> nodes_needed;
  bool any_foreign = false;
  for (const auto& [c, v] : cells) {
    if (st.columns[c].crosscat_modeled) {
      root_cells[c] = v;
      continue;
    }
    any_foreign = true;
    ancestor_closure(st, c, roots_needed, nodes_needed);
  }
  double lp = root_cells.empty() ? 0.0 : root_cells_logpdf(st, row, root_cells);
  if (!any_foreign) return lp;

  std::vector<double> logws;
  logws.reserve(particles);
  for (std::size_t i = 0; i < particles; ++i)
    logws.push_back(draw_particle(st, row, cells, roots_needed, nodes_needed, rng).logw);
  lp += logsumexp(logws) - std::log(double(particles));
  return lp;
}

inline void validate_cells(const State& st, const std::map<ColumnId, Value>& cells) {
  for (const auto& [c, v] : cells) {
    if (classify(st, c, nullptr, nullptr) == qdetail::ColKind::unmodeled)
      throw Error("column " + std::to_string(c) + " is not modeled");
    if (v.is_missing()) throw Error("cell values must not be missing");
    if (!value_matches(v, st.columns[c].type))
      throw Error("value does not match type of column " + std::to_string(c));
  }
}

}  // namespace qdetail

// Log density of `query` cells given `givens` cells, all within one row.
// Exact for root columns; Monte Carlo marginalization over unobserved
// parents when foreign columns are involved. For an incorporated row the
// row's own contribution to the sufficient statistics is excluded, so the
// result is the predictive given the rest of the data and the conditioning
// values.
inline double row_logpdf(const State& st, RowId row, const std::map<ColumnId, Value>& givens,
                         const std::map<ColumnId, Value>& query, Rng& rng,
                         const QueryOptions& opts = {}) {
  if (query.empty()) throw Error("row_logpdf: empty query");
  qdetail::validate_cells(st, givens);
  qdetail::validate_cells(st, query);
  std::map<ColumnId, Value> joint = givens;
  for (const auto& [c, v] : query)
    if (!joint.emplace(c, v).second) throw Error("row_logpdf: query and givens overlap");

  bool any_foreign = false;
  for (const auto& [c, _] : joint)
    if (!st.columns[c].crosscat_modeled) any_foreign = true;

  double lp_given = 0.0;
  if (!givens.empty()) {
    lp_given = any_foreign
                   ? qdetail::mixed_cells_logpdf(st, row, givens, opts.particles, rng)
                   : qdetail::root_cells_logpdf(st, row, givens);
    if (lp_given == kNegInf)
      throw gpm::ConditioningError("conditioning values have zero density");
  }
  double lp_joint = any_foreign
                        ? qdetail::mixed_cells_logpdf(st, row, joint, opts.particles, rng)
                        : qdetail::root_cells_logpdf(st, row, joint);
  return lp_joint - lp_given;
}

// n joint draws of `targets` given `givens`, all within one row. Foreign
// givens are handled by importance sampling with resampling over the
// unpinned ancestors; foreign targets are then simulated feedforward.
inline std::vector<std::map<ColumnId, Value>> row_simulate(
    const State& st, RowId row, const std::map<ColumnId, Value>& givens,
    const std::vector<ColumnId>& targets, std::size_t n, Rng& rng,
    const QueryOptions& opts = {}) {
  if (targets.empty()) throw Error("row_simulate: empty targets");
  qdetail::validate_cells(st, givens);
  std::set<ColumnId> target_set(targets.begin(), targets.end());
  for (ColumnId c : targets) {
    if (givens.count(c)) throw Error("row_simulate: targets and givens overlap");
    if (qdetail::classify(st, c, nullptr, nullptr) == qdetail::ColKind::unmodeled)
      throw Error("column " + std::to_string(c) + " is not modeled");
  }

  // ancestors needed by any foreign column involved
  std::set<ColumnId> roots_needed;
  std::set<std::size_t> nodes_needed;
  std::map<ColumnId, Value> foreign_givens;
  for (const auto& [c, v] : givens)
    if (!st.columns[c].crosscat_modeled) {
      foreign_givens[c] = v;
      qdetail::ancestor_closure(st, c, roots_needed, nodes_needed);
    }
  for (ColumnId c : targets) {
    if (!st.columns[c].crosscat_modeled)
      qdetail::ancestor_closure(st, c, roots_needed, nodes_needed);
    else
      roots_needed.insert(c);
  }

  std::map<ColumnId, Value> root_givens;
  for (const auto& [c, v] : givens)
    if (st.columns[c].crosscat_modeled) root_givens[c] = v;

  std::vector<std::map<ColumnId, Value>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    qdetail::Particle chosen;
    if (foreign_givens.empty()) {
      std::size_t attempts = 0;
      do {
        chosen = qdetail::draw_particle(st, row, givens, roots_needed, nodes_needed, rng);
        if (++attempts > 1000)
          throw gpm::ConditioningError(
              "sampled parent values never entered the foreign predictor's domain");
      } while (chosen.forward_failed);
    } else {
      std::vector<qdetail::Particle> ps;
      std::vector<double> logw;
      ps.reserve(opts.particles);
      for (std::size_t k = 0; k < opts.particles; ++k) {
        ps.push_back(qdetail::draw_particle(st, row, givens, roots_needed, nodes_needed, rng));
        logw.push_back(ps.back().forward_failed ? kNegInf : ps.back().logw);
      }
      if (logsumexp(logw) == kNegInf)
        throw gpm::ConditioningError("conditioning values have zero density");
      chosen = ps[rng.categorical_log(logw)];
    }
    std::map<ColumnId, Value> sample;
    for (ColumnId c : targets) sample[c] = chosen.cells.at(c);
    out.push_back(std::move(sample));
  }
  return out;
}

// gpm::Gpm adapter over a frozen state. All cells of one call must share one
// row id; an unincorporated row id denotes a hypothetical member.
class CrossCatGpm : public gpm::Gpm {
 public:
  explicit CrossCatGpm(const State& st, QueryOptions opts = {}) : st_(&st), opts_(opts) {
    for (ColumnId c = 0; c < st.columns.size(); ++c)
      if (st.columns[c].type.modeled())
        schema_.outputs.emplace_back(c, st.columns[c].type);
    schema_.check();
  }

  const gpm::GpmSchema& schema() const override { return schema_; }

  std::vector<std::vector<Value>> simulate(std::span<const gpm::CellAssignment> givens,
                                           std::span<const gpm::CellRef> targets,
                                           std::size_t n, Rng& rng) const override {
    RowId row = one_row(givens, targets);
    std::map<ColumnId, Value> g;
    for (const auto& a : givens) g[a.col] = a.value;
    std::vector<ColumnId> t;
    for (const auto& r : targets) t.push_back(r.col);
    auto samples = row_simulate(*st_, row, g, t, n, rng, opts_);
    std::vector<std::vector<Value>> out;
    out.reserve(n);
    for (auto& s : samples) {
      std::vector<Value> rowv;
      rowv.reserve(t.size());
      for (ColumnId c : t) rowv.push_back(s.at(c));
      out.push_back(std::move(rowv));
    }
    return out;
  }

  double logpdf(std::span<const gpm::CellAssignment> givens,
                std::span<const gpm::CellAssignment> query, Rng& rng) const override {
    if (query.empty()) throw Error("logpdf: empty query");
    RowId row = query[0].row;
    std::map<ColumnId, Value> g, q;
    for (const auto& a : givens) {
      if (a.row != row) throw Error("queries must reference a single row");
      g[a.col] = a.value;
    }
    for (const auto& a : query) {
      if (a.row != row) throw Error("queries must reference a single row");
      q[a.col] = a.value;
    }
    return row_logpdf(*st_, row, g, q, rng, opts_);
  }

 private:
  static RowId one_row(std::span<const gpm::CellAssignment> givens,
                       std::span<const gpm::CellRef> targets) {
    if (targets.empty()) throw Error("simulate: empty targets");
    RowId row = targets[0].row;
    for (const auto& t : targets)
      if (t.row != row) throw Error("queries must reference a single row");
    for (const auto& a : givens)
      if (a.row != row) throw Error("queries must reference a single row");
    return row;
  }

  const State* st_;
  QueryOptions opts_;
  gpm::GpmSchema schema_;
};

}  // namespace bqldb::crosscat
