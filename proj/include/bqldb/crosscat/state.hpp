#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "bqldb/core/schema.hpp"
#include "bqldb/core/store.hpp"
#include "bqldb/crosscat/component.hpp"
#include "bqldb/crosscat/hypergrid.hpp"
#include "bqldb/foreign/predictor.hpp"
#include "bqldb/foreign/registry.hpp"
#include "bqldb/gpm/interface.hpp"
#include "bqldb/util/rng.hpp"

namespace bqldb::crosscat {

using ViewId = std::uint32_t;
using ClusterId = std::uint32_t;

struct DependenceConstraint {
  enum class Kind { dependent, independent };
  Kind kind;
  ColumnId a;
  ColumnId b;
};

// Test/diagnostic hooks: pin concentrations or per-column hyperparameters so
// that small-table posteriors can be enumerated exactly. Pinned quantities
// are skipped by the hyperparameter transition.
struct InitOptions {
  std::optional<double> fixed_col_alpha;
  std::optional<double> fixed_row_alpha;
  std::map<ColumnId, Hypers> fixed_hypers;
};

struct Cluster {
  std::int64_t size = 0;                // rows assigned
  std::map<ColumnId, Stats> stats;      // per modeled column in the view
};

struct View {
  double row_alpha = 1.0;               // row-partition CRP concentration
  std::vector<ColumnId> cols;           // sorted
  std::map<RowId, ClusterId> assign;
  std::map<ClusterId, Cluster> clusters;
  ClusterId next_cluster = 0;

  std::int64_t n_rows() const { return std::int64_t(assign.size()); }

  bool has_col(ColumnId c) const {
    return std::find(cols.begin(), cols.end(), c) != cols.end();
  }
};

struct ColumnState {
  StatType type;
  bool crosscat_modeled = false;  // in the column partition
  bool foreign_owned = false;
  HyperGrid grid;
  Hypers hypers;
  bool hypers_fixed = false;
};

struct ForeignNode {
  foreign::ForeignSpec spec;
  std::unique_ptr<foreign::ForeignPredictor> model;

  ForeignNode() = default;
  ForeignNode(foreign::ForeignSpec s, std::unique_ptr<foreign::ForeignPredictor> m)
      : spec(std::move(s)), model(std::move(m)) {}
  ForeignNode(const ForeignNode& o)
      : spec(o.spec), model(o.model ? o.model->clone() : nullptr) {}
  ForeignNode& operator=(const ForeignNode& o) {
    if (this != &o) {
      spec = o.spec;
      model = o.model ? o.model->clone() : nullptr;
    }
    return *this;
  }
  ForeignNode(ForeignNode&&) = default;
  ForeignNode& operator=(ForeignNode&&) = default;
};

// One factorial-mixture model: a CRP partition of columns into views, a CRP
// row partition per view with collapsed conjugate components, qualitative
// (in)dependence constraints, and feedforward foreign predictors hanging off
// designated columns. One state = one chain: a single mutator at a time;
// read-only queries may share a frozen state.
class State {
 public:
  std::vector<ColumnState> columns;        // indexed by ColumnId
  double col_alpha = 1.0;                  // column-partition CRP concentration
  std::map<ColumnId, ViewId> view_of;      // crosscat-modeled columns only
  std::map<ViewId, View> views;
  ViewId next_view = 0;
  std::vector<DependenceConstraint> constraints;
  std::vector<ForeignNode> foreign_nodes;
  std::map<RowId, std::vector<Value>> rows;  // incorporated raw values
  Rng rng;
  std::uint64_t seed = 0;
  std::int64_t sweeps = 0;
  InitOptions opts;

  State() : rng(0) {}

  // ---- constraint handling -------------------------------------------------

  // Union-find roots of the must-link groups among crosscat-modeled columns.
  std::map<ColumnId, ColumnId> dependence_roots() const {
    std::map<ColumnId, ColumnId> parent;
    for (ColumnId c = 0; c < columns.size(); ++c)
      if (columns[c].crosscat_modeled) parent[c] = c;
    auto find = [&](ColumnId c) {
      while (parent.at(c) != c) c = parent.at(c);
      return c;
    };
    for (const auto& m : constraints) {
      if (m.kind != DependenceConstraint::Kind::dependent) continue;
      ColumnId ra = find(m.a), rb = find(m.b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::map<ColumnId, ColumnId> roots;
    for (auto& [c, _] : parent) roots[c] = find(c);
    return roots;
  }

  // Columns that move together through the column kernel.
  std::vector<std::vector<ColumnId>> column_units() const {
    auto roots = dependence_roots();
    std::map<ColumnId, std::vector<ColumnId>> by_root;
    for (auto& [c, r] : roots) by_root[r].push_back(c);
    std::vector<std::vector<ColumnId>> units;
    for (auto& [_, cols] : by_root) units.push_back(cols);
    return units;
  }

  bool forbidden_together(ColumnId a, ColumnId b) const {
    for (const auto& m : constraints)
      if (m.kind == DependenceConstraint::Kind::independent &&
          ((m.a == a && m.b == b) || (m.a == b && m.b == a)))
        return true;
    return false;
  }

  bool unit_allowed_in_view(const std::vector<ColumnId>& unit, const View& v) const {
    for (ColumnId uc : unit)
      for (ColumnId vc : v.cols)
        if (forbidden_together(uc, vc)) return false;
    return true;
  }

  bool constraints_satisfied() const {
    for (const auto& m : constraints) {
      auto ia = view_of.find(m.a), ib = view_of.find(m.b);
      if (ia == view_of.end() || ib == view_of.end()) return false;
      bool same = ia->second == ib->second;
      if (m.kind == DependenceConstraint::Kind::dependent && !same) return false;
      if (m.kind == DependenceConstraint::Kind::independent && same) return false;
    }
    return true;
  }

  // ---- modeling-space conversion --------------------------------------------

  double modeling_value(ColumnId c, const Value& v) const {
    double x = v.as_double();
    if (columns[c].type.log_scale) return std::log(x);
    return x;
  }

  // Jacobian of the modeling transform, added to component log densities so
  // that logpdf is a density over raw values.
  double log_jacobian(ColumnId c, const Value& v) const {
    if (columns[c].type.log_scale) return -std::log(v.as_double());
    return 0.0;
  }

  Value raw_value(ColumnId c, double modeling_x) const {
    const StatType& t = columns[c].type;
    switch (t.kind) {
      case StatKind::categorical: return Value::categorical(std::int64_t(modeling_x));
      case StatKind::binary: return Value::binary(modeling_x > 0.5);
      case StatKind::count: return Value::count(std::int64_t(modeling_x));
      case StatKind::numerical:
        return Value::real(t.log_scale ? std::exp(modeling_x) : modeling_x);
      case StatKind::ignore: break;
    }
    throw Error("raw_value on unmodeled column");
  }

  double col_log_predictive(ColumnId c, const Stats& s, const Value& v) const {
    return log_predictive(columns[c].hypers, s, modeling_value(c, v)) +
           log_jacobian(c, v);
  }

  Value col_sample_predictive(ColumnId c, const Stats& s, Rng& r) const {
    return raw_value(c, sample_predictive(columns[c].hypers, s, r));
  }

  // ---- initialization --------------------------------------------------------

  static void check_constraints_spec(const PopulationSchema& schema,
                                     const std::vector<DependenceConstraint>& constraints,
                                     const std::vector<foreign::ForeignSpec>& fspecs) {
    std::set<ColumnId> foreign_outputs;
    for (const auto& f : fspecs)
      foreign_outputs.insert(f.outputs.begin(), f.outputs.end());
    std::map<ColumnId, ColumnId> parent;
    for (ColumnId c = 0; c < schema.size(); ++c) parent[c] = c;
    auto find = [&](ColumnId c) {
      while (parent.at(c) != c) c = parent.at(c);
      return c;
    };
    for (const auto& m : constraints) {
      if (m.a == m.b) throw Error("constraint references a column paired with itself");
      if (m.a >= schema.size() || m.b >= schema.size())
        throw Error("constraint references an unknown column");
      for (ColumnId c : {m.a, m.b}) {
        if (!schema.type_of(c).modeled())
          throw Error("constraint references ignored column '" + schema.name_of(c) + "'");
        if (foreign_outputs.count(c))
          throw Error("constraint references foreign-modeled column '" +
                      schema.name_of(c) + "'");
      }
      if (m.kind == DependenceConstraint::Kind::dependent) {
        ColumnId ra = find(m.a), rb = find(m.b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
    for (const auto& m : constraints) {
      if (m.kind != DependenceConstraint::Kind::independent) continue;
      if (find(m.a) == find(m.b))
        throw Error("contradictory constraints: '" + schema.name_of(m.a) + "' and '" +
                    schema.name_of(m.b) + "' both linked and separated");
    }
  }

  // Prior-sample a state with zero rows. Constraints hold by construction:
  // must-link groups are seated as blocks, cannot-link pairs get
  // zero-probability seatings. `grid_data`, when given, drives the
  // data-dependent hyper grids.
  static State initialize(const PopulationSchema& schema,
                          const std::vector<DependenceConstraint>& constraints,
                          const std::vector<foreign::ForeignSpec>& fspecs,
                          std::uint64_t seed, const InitOptions& opts = {},
                          const MeasurementStore* grid_data = nullptr) {
    schema.check();
    foreign::check_acyclic(fspecs);
    check_constraints_spec(schema, constraints, fspecs);

    State st;
    st.seed = seed;
    st.rng = Rng(seed);
    st.opts = opts;
    st.constraints = constraints;

    std::set<ColumnId> foreign_outputs;
    for (const auto& f : fspecs)
      foreign_outputs.insert(f.outputs.begin(), f.outputs.end());

    st.columns.resize(schema.size());
    for (ColumnId c = 0; c < schema.size(); ++c) {
      ColumnState& cs = st.columns[c];
      cs.type = schema.type_of(c);
      cs.foreign_owned = foreign_outputs.count(c) != 0;
      cs.crosscat_modeled = cs.type.modeled() && !cs.foreign_owned;
      if (!cs.type.modeled()) continue;
      if (cs.foreign_owned) continue;  // foreign columns have no component model
      std::vector<double> data;
      if (grid_data) {
        for (const auto& [r, row] : grid_data->rows()) {
          auto it = row.find(c);
          if (it != row.end()) data.push_back(st.modeling_value(c, it->second));
        }
      }
      cs.grid = build_grid(cs.type, data);
      auto fixed = opts.fixed_hypers.find(c);
      if (fixed != opts.fixed_hypers.end()) {
        cs.hypers = fixed->second;
        cs.hypers_fixed = true;
        check_hypers(cs.hypers);
      } else {
        cs.hypers = initial_hypers(cs.type, cs.grid, st.rng);
      }
    }

    for (const auto& f : fspecs) {
      std::vector<StatType> outs, ins;
      for (ColumnId c : f.outputs) outs.push_back(schema.type_of(c));
      for (ColumnId c : f.inputs) ins.push_back(schema.type_of(c));
      st.foreign_nodes.emplace_back(f, foreign::make_foreign(f.registry_key, outs, ins));
    }

    st.col_alpha = opts.fixed_col_alpha ? *opts.fixed_col_alpha : st.rng.gamma(1.0, 1.0);
    st.sample_column_partition();
    return st;
  }

  // Seat the must-link units sequentially; block weights follow the CRP
  // restated over parties, cannot-link seatings get zero weight.
  void sample_column_partition() {
    view_of.clear();
    views.clear();
    next_view = 0;
    for (const auto& unit : column_units()) {
      double s = double(unit.size());
      std::vector<ViewId> ids;
      std::vector<double> logw;
      for (auto& [vid, v] : views) {
        if (!unit_allowed_in_view(unit, v)) continue;
        ids.push_back(vid);
        logw.push_back(log_rising(double(v.cols.size()), s));
      }
      ids.push_back(next_view);
      logw.push_back(std::log(col_alpha) + std::lgamma(s));
      ViewId chosen = ids[rng.categorical_log(logw)];
      if (!views.count(chosen)) new_view(chosen);
      for (ColumnId c : unit) attach_column(c, chosen);
    }
  }

  View& new_view(ViewId vid) {
    View v;
    v.row_alpha = opts.fixed_row_alpha ? *opts.fixed_row_alpha : rng.gamma(1.0, 1.0);
    // existing rows seat sequentially from the CRP prior
    for (const auto& [r, _] : rows) {
      std::vector<ClusterId> ids;
      std::vector<double> w;
      for (auto& [cid, cl] : v.clusters) {
        ids.push_back(cid);
        w.push_back(double(cl.size));
      }
      ids.push_back(v.next_cluster);
      w.push_back(v.row_alpha);
      ClusterId chosen = ids[rng.categorical(w)];
      if (!v.clusters.count(chosen)) {
        v.clusters[chosen] = Cluster{};
        v.next_cluster = chosen + 1;
      }
      v.assign[r] = chosen;
      v.clusters[chosen].size += 1;
    }
    auto [it, _] = views.emplace(vid, std::move(v));
    next_view = std::max(next_view, ViewId(vid + 1));
    return it->second;
  }

  // Attach a column to a view, building its per-cluster statistics from the
  // incorporated rows.
  void attach_column(ColumnId c, ViewId vid) {
    View& v = views.at(vid);
    v.cols.push_back(c);
    std::sort(v.cols.begin(), v.cols.end());
    view_of[c] = vid;
    for (auto& [cid, cl] : v.clusters) cl.stats[c] = empty_stats(columns[c].hypers);
    for (const auto& [r, vals] : rows) {
      const Value& x = vals[c];
      if (x.is_missing()) continue;
      Cluster& cl = v.clusters.at(v.assign.at(r));
      stats_add(cl.stats.at(c), modeling_value(c, x));
    }
  }

  void detach_column(ColumnId c) {
    auto it = view_of.find(c);
    if (it == view_of.end()) return;
    View& v = views.at(it->second);
    v.cols.erase(std::remove(v.cols.begin(), v.cols.end(), c), v.cols.end());
    for (auto& [cid, cl] : v.clusters) cl.stats.erase(c);
    ViewId vid = it->second;
    view_of.erase(it);
    if (v.cols.empty()) views.erase(vid);
  }

  // ---- incorporate / remove ---------------------------------------------------

  bool has_row(RowId r) const { return rows.count(r) != 0; }

  // Single collapsed Gibbs step per view; the return value is
  // log p(values | state before incorporation), the SMC weight increment.
  double incorporate(RowId r, const std::vector<Value>& values) {
    if (rows.count(r)) throw Error("row " + std::to_string(r) + " already incorporated");
    if (values.size() != columns.size())
      throw Error("incorporate: value vector has wrong arity");
    for (ColumnId c = 0; c < columns.size(); ++c) {
      if (values[c].is_missing()) continue;
      if (!value_matches(values[c], columns[c].type))
        throw Error("incorporate: value does not match type of column " + std::to_string(c));
    }

    double log_weight = 0.0;
    std::map<ViewId, ClusterId> chosen;
    for (auto& [vid, v] : views) {
      std::vector<ClusterId> ids;
      std::vector<double> logw;
      double log_denom = std::log(double(v.n_rows()) + v.row_alpha);
      for (auto& [cid, cl] : v.clusters) {
        double lw = std::log(double(cl.size)) - log_denom;
        for (ColumnId c : v.cols)
          if (!values[c].is_missing()) lw += col_log_predictive(c, cl.stats.at(c), values[c]);
        ids.push_back(cid);
        logw.push_back(lw);
      }
      {
        double lw = std::log(v.row_alpha) - log_denom;
        for (ColumnId c : v.cols)
          if (!values[c].is_missing())
            lw += col_log_predictive(c, empty_stats(columns[c].hypers), values[c]);
        ids.push_back(v.next_cluster);
        logw.push_back(lw);
      }
      double marginal = logsumexp(logw);
      if (marginal == kNegInf)
        throw gpm::ConditioningError("incorporate: row has zero density in view " +
                                     std::to_string(vid));
      log_weight += marginal;
      chosen[vid] = ids[rng.categorical_log(logw)];
    }

    // foreign likelihood contribution when parents are fully observed
    for (const auto& fn : foreign_nodes) {
      bool any_output = false;
      std::vector<std::optional<Value>> outs;
      for (ColumnId c : fn.spec.outputs) {
        if (!values[c].is_missing()) {
          outs.emplace_back(values[c]);
          any_output = true;
        } else {
          outs.emplace_back(std::nullopt);
        }
      }
      if (!any_output) continue;
      std::vector<Value> ins;
      bool parents_ok = true;
      for (ColumnId c : fn.spec.inputs) {
        if (values[c].is_missing()) {
          parents_ok = false;
          break;
        }
        ins.push_back(values[c]);
      }
      if (parents_ok) log_weight += fn.model->logpdf(outs, ins);
    }

    rows[r] = values;
    for (auto& [vid, cid] : chosen) {
      View& v = views.at(vid);
      if (!v.clusters.count(cid)) {
        Cluster cl;
        for (ColumnId c : v.cols) cl.stats[c] = empty_stats(columns[c].hypers);
        v.clusters.emplace(cid, std::move(cl));
        v.next_cluster = cid + 1;
      }
      Cluster& cl = v.clusters.at(cid);
      cl.size += 1;
      v.assign[r] = cid;
      for (ColumnId c : v.cols)
        if (!values[c].is_missing())
          stats_add(cl.stats.at(c), modeling_value(c, values[c]));
    }
    return log_weight;
  }

  // Leaves sufficient statistics exactly as if the row was never
  // incorporated; empty clusters are deleted.
  void remove(RowId r) {
    auto it = rows.find(r);
    if (it == rows.end()) throw Error("remove: unknown row " + std::to_string(r));
    const std::vector<Value>& values = it->second;
    for (auto& [vid, v] : views) {
      ClusterId cid = v.assign.at(r);
      Cluster& cl = v.clusters.at(cid);
      for (ColumnId c : v.cols)
        if (!values[c].is_missing())
          stats_remove(cl.stats.at(c), modeling_value(c, values[c]));
      cl.size -= 1;
      v.assign.erase(r);
      if (cl.size == 0) v.clusters.erase(cid);
    }
    rows.erase(it);
  }

  // Re-derives every sufficient statistic from the raw assignments in row
  // order. Incremental updates during long chains accumulate float error in
  // a history-dependent order; rebuilding makes the state canonical, so a
  // serialize/load round trip reproduces queries bit-for-bit.
  void rebuild_stats() {
    for (auto& [vid, v] : views) {
      for (auto& [cid, cl] : v.clusters)
        for (ColumnId c : v.cols) cl.stats[c] = empty_stats(columns[c].hypers);
      for (const auto& [r, cid] : v.assign) {
        Cluster& cl = v.clusters.at(cid);
        const auto& vals = rows.at(r);
        for (ColumnId c : v.cols)
          if (!vals[c].is_missing()) stats_add(cl.stats.at(c), modeling_value(c, vals[c]));
      }
    }
  }

  // ---- integrity ---------------------------------------------------------------

  // Recompute all sufficient statistics from the raw assignments and compare.
  void check_integrity() const {
    for (const auto& [vid, v] : views) {
      if (v.assign.size() != rows.size())
        throw Error("integrity: view assignment count mismatch");
      std::map<ClusterId, Cluster> rebuilt;
      for (const auto& [r, cid] : v.assign) {
        auto& cl = rebuilt[cid];
        if (cl.stats.empty())
          for (ColumnId c : v.cols) cl.stats[c] = empty_stats(columns[c].hypers);
        cl.size += 1;
        const auto& vals = rows.at(r);
        for (ColumnId c : v.cols)
          if (!vals[c].is_missing()) stats_add(cl.stats.at(c), modeling_value(c, vals[c]));
      }
      if (rebuilt.size() != v.clusters.size())
        throw Error("integrity: cluster count mismatch (empty cluster retained?)");
      for (const auto& [cid, cl] : v.clusters) {
        auto jt = rebuilt.find(cid);
        if (jt == rebuilt.end()) throw Error("integrity: stray cluster");
        if (jt->second.size != cl.size) throw Error("integrity: cluster size mismatch");
        for (ColumnId c : v.cols) {
          double want = log_marginal(columns[c].hypers, jt->second.stats.at(c));
          double got = log_marginal(columns[c].hypers, cl.stats.at(c));
          if (std::abs(want - got) > 1e-6 * std::max(1.0, std::abs(want)))
            throw Error("integrity: sufficient statistics drifted");
        }
      }
    }
    for (const auto& [c, vid] : view_of)
      if (!views.at(vid).has_col(c)) throw Error("integrity: column/view mismatch");
  }

  std::size_t n_rows() const { return rows.size(); }
};

}  // namespace bqldb::crosscat
