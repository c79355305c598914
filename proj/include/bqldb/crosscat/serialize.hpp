#pragma once

#include <json.hpp>

#include "bqldb/crosscat/ensemble.hpp"
#include "bqldb/crosscat/state.hpp"

namespace bqldb::crosscat {

constexpr int kEnsembleFormatVersion = 1;

inline nlohmann::json constraint_to_json(const DependenceConstraint& m) {
  return {{"kind", m.kind == DependenceConstraint::Kind::dependent ? "dependent"
                                                                   : "independent"},
          {"a", m.a},
          {"b", m.b}};
}

inline DependenceConstraint constraint_from_json(const nlohmann::json& j) {
  DependenceConstraint m;
  std::string k = j.at("kind").get<std::string>();
  m.kind = k == "dependent" ? DependenceConstraint::Kind::dependent
                            : DependenceConstraint::Kind::independent;
  m.a = j.at("a").get<ColumnId>();
  m.b = j.at("b").get<ColumnId>();
  return m;
}

// Latent state only: assignments, hyperparameters, grids, constraints,
// foreign parameters, rng. Sufficient statistics are rebuilt from the data
// on load.
inline nlohmann::json state_to_json(const State& st) {
  nlohmann::json j;
  j["col_alpha"] = st.col_alpha;
  j["seed"] = st.seed;
  j["sweeps"] = st.sweeps;
  j["rng_state"] = st.rng.serialize();

  nlohmann::json cols = nlohmann::json::array();
  for (ColumnId c = 0; c < st.columns.size(); ++c) {
    const ColumnState& cs = st.columns[c];
    nlohmann::json cj;
    cj["id"] = c;
    cj["crosscat_modeled"] = cs.crosscat_modeled;
    cj["foreign_owned"] = cs.foreign_owned;
    if (cs.crosscat_modeled) {
      cj["hypers"] = hypers_to_json(cs.hypers);
      cj["hypers_fixed"] = cs.hypers_fixed;
      cj["grid"] = grid_to_json(cs.grid);
    }
    cols.push_back(std::move(cj));
  }
  j["columns"] = std::move(cols);

  nlohmann::json z = nlohmann::json::array();
  for (const auto& [c, vid] : st.view_of) z.push_back({c, vid});
  j["column_views"] = std::move(z);

  nlohmann::json views = nlohmann::json::array();
  for (const auto& [vid, v] : st.views) {
    nlohmann::json vj;
    vj["id"] = vid;
    vj["row_alpha"] = v.row_alpha;
    nlohmann::json assign = nlohmann::json::array();
    for (const auto& [r, cid] : v.assign) assign.push_back({r, cid});
    vj["assign"] = std::move(assign);
    views.push_back(std::move(vj));
  }
  j["views"] = std::move(views);

  nlohmann::json cons = nlohmann::json::array();
  for (const auto& m : st.constraints) cons.push_back(constraint_to_json(m));
  j["constraints"] = std::move(cons);

  nlohmann::json fns = nlohmann::json::array();
  for (const auto& fn : st.foreign_nodes)
    fns.push_back({{"key", fn.spec.registry_key},
                   {"outputs", fn.spec.outputs},
                   {"inputs", fn.spec.inputs},
                   {"params", fn.model->params_to_json()}});
  j["foreign"] = std::move(fns);

  nlohmann::json opts;
  if (st.opts.fixed_col_alpha) opts["fixed_col_alpha"] = *st.opts.fixed_col_alpha;
  if (st.opts.fixed_row_alpha) opts["fixed_row_alpha"] = *st.opts.fixed_row_alpha;
  nlohmann::json fh = nlohmann::json::array();
  for (const auto& [c, h] : st.opts.fixed_hypers)
    fh.push_back({{"col", c}, {"hypers", hypers_to_json(h)}});
  opts["fixed_hypers"] = std::move(fh);
  j["opts"] = std::move(opts);
  return j;
}

inline State state_from_json(const nlohmann::json& j, const PopulationSchema& schema,
                             const MeasurementStore& store) {
  State st;
  st.col_alpha = j.at("col_alpha").get<double>();
  st.seed = j.at("seed").get<std::uint64_t>();
  st.sweeps = j.at("sweeps").get<std::int64_t>();
  st.rng = Rng(st.seed);
  st.rng.restore(j.at("rng_state").get<std::string>());

  if (j.contains("opts")) {
    const auto& o = j.at("opts");
    if (o.contains("fixed_col_alpha"))
      st.opts.fixed_col_alpha = o.at("fixed_col_alpha").get<double>();
    if (o.contains("fixed_row_alpha"))
      st.opts.fixed_row_alpha = o.at("fixed_row_alpha").get<double>();
    if (o.contains("fixed_hypers"))
      for (const auto& e : o.at("fixed_hypers"))
        st.opts.fixed_hypers[e.at("col").get<ColumnId>()] =
            hypers_from_json(e.at("hypers"));
  }

  st.columns.resize(schema.size());
  const auto& cols = j.at("columns");
  if (cols.size() != schema.size())
    throw Error("ensemble file does not match the population schema");
  for (const auto& cj : cols) {
    ColumnId c = cj.at("id").get<ColumnId>();
    ColumnState& cs = st.columns.at(c);
    cs.type = schema.type_of(c);
    cs.crosscat_modeled = cj.at("crosscat_modeled").get<bool>();
    cs.foreign_owned = cj.at("foreign_owned").get<bool>();
    if (cs.crosscat_modeled) {
      cs.hypers = hypers_from_json(cj.at("hypers"));
      cs.hypers_fixed = cj.at("hypers_fixed").get<bool>();
      cs.grid = grid_from_json(cj.at("grid"));
    }
  }

  for (const auto& m : j.at("constraints"))
    st.constraints.push_back(constraint_from_json(m));

  for (const auto& fj : j.at("foreign")) {
    foreign::ForeignSpec spec;
    spec.registry_key = fj.at("key").get<std::string>();
    spec.outputs = fj.at("outputs").get<std::vector<ColumnId>>();
    spec.inputs = fj.at("inputs").get<std::vector<ColumnId>>();
    std::vector<StatType> outs, ins;
    for (ColumnId c : spec.outputs) outs.push_back(schema.type_of(c));
    for (ColumnId c : spec.inputs) ins.push_back(schema.type_of(c));
    auto model = foreign::make_foreign(spec.registry_key, outs, ins);
    model->params_from_json(fj.at("params"));
    st.foreign_nodes.emplace_back(std::move(spec), std::move(model));
  }

  for (const auto& [r, _] : store.rows())
    st.rows[r] = row_values_from_store(store, schema.size(), r);

  for (const auto& vj : j.at("views")) {
    ViewId vid = vj.at("id").get<ViewId>();
    View v;
    v.row_alpha = vj.at("row_alpha").get<double>();
    for (const auto& e : vj.at("assign")) {
      RowId r = e.at(0).get<RowId>();
      ClusterId cid = e.at(1).get<ClusterId>();
      if (!st.rows.count(r)) throw Error("ensemble file references unknown row");
      v.assign[r] = cid;
      auto it = v.clusters.find(cid);
      if (it == v.clusters.end()) it = v.clusters.emplace(cid, Cluster{}).first;
      it->second.size += 1;
      v.next_cluster = std::max(v.next_cluster, ClusterId(cid + 1));
    }
    if (v.assign.size() != st.rows.size())
      throw Error("ensemble file view does not cover all rows");
    st.views.emplace(vid, std::move(v));
    st.next_view = std::max(st.next_view, ViewId(vid + 1));
  }

  for (const auto& e : j.at("column_views")) {
    ColumnId c = e.at(0).get<ColumnId>();
    ViewId vid = e.at(1).get<ViewId>();
    if (!st.views.count(vid)) throw Error("ensemble file references unknown view");
    st.attach_column(c, vid);
  }
  if (!st.constraints_satisfied())
    throw Error("ensemble file violates its own constraints");
  return st;
}

inline nlohmann::json ensemble_to_json(const Ensemble& ens) {
  nlohmann::json j;
  j["format_version"] = kEnsembleFormatVersion;
  j["schema_hash"] = ens.schema_fingerprint;
  j["stale"] = ens.stale;
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : ens.members)
    members.push_back({{"weight", m.weight},
                       {"smc_log_weight", m.smc_log_weight},
                       {"state", state_to_json(m.state)}});
  j["members"] = std::move(members);
  return j;
}

inline Ensemble ensemble_from_json(const nlohmann::json& j, const PopulationSchema& schema,
                                   const MeasurementStore& store) {
  if (j.at("format_version").get<int>() != kEnsembleFormatVersion)
    throw Error("unsupported ensemble format version");
  Ensemble ens;
  ens.schema_fingerprint = j.at("schema_hash").get<std::uint64_t>();
  if (ens.schema_fingerprint != schema_hash(schema))
    throw Error("ensemble schema hash does not match the population schema; refusing to load");
  ens.stale = j.value("stale", false);
  for (const auto& mj : j.at("members")) {
    EnsembleMember m;
    m.weight = mj.at("weight").get<double>();
    m.smc_log_weight = mj.at("smc_log_weight").get<double>();
    m.state = state_from_json(mj.at("state"), schema, store);
    ens.members.push_back(std::move(m));
  }
  ens.check();
  return ens;
}

}  // namespace bqldb::crosscat
