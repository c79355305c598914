#pragma once

#include <algorithm>

#include "bqldb/bql/ast.hpp"
#include "bqldb/bql/confidence.hpp"
#include "bqldb/bql/parser.hpp"
#include "bqldb/bql/predicate.hpp"
#include "bqldb/cli/session.hpp"
#include "bqldb/crosscat/ensemble.hpp"
#include "bqldb/crosscat/estimands.hpp"
#include "bqldb/crosscat/gibbs.hpp"
#include "bqldb/crosscat/query.hpp"

namespace bqldb::bql {

using cli::Population;

struct Cell {
  enum class Kind { missing, value, text };
  Kind kind = Kind::missing;
  Value value;
  std::string text;

  static Cell null() { return {}; }
  static Cell of(const Value& v) {
    if (v.is_missing()) return {};
    return {Kind::value, v, ""};
  }
  static Cell of_text(std::string s) { return {Kind::text, {}, std::move(s)}; }
  static Cell of_real(double x) { return of(Value::real(x)); }
  static Cell of_count(std::int64_t n) { return of(Value::count(n)); }
};

// Tabular answer with provenance. `types` drives rendering of value cells;
// computed columns (probabilities, counts) are numerical.
struct QueryResult {
  std::vector<std::string> headers;
  std::vector<StatType> types;
  std::vector<std::optional<RowId>> provenance;
  std::vector<std::vector<Cell>> rows;
  std::string message;  // status-only statements

  bool tabular() const { return !headers.empty(); }

  void check() const {
    for (std::size_t i = 0; i < headers.size(); ++i)
      for (std::size_t j = i + 1; j < headers.size(); ++j)
        if (headers[i] == headers[j]) throw Error("duplicate result header");
    for (const auto& r : rows)
      if (r.size() != headers.size()) throw Error("ragged result");
  }
};

inline std::string render_cell(const Cell& c, const StatType& t) {
  switch (c.kind) {
    case Cell::Kind::missing: return "";
    case Cell::Kind::text: return c.text;
    case Cell::Kind::value: return render_value(c.value, t);
  }
  return "";
}

namespace xdetail {

inline Value literal_to_value(const Literal& lit, const StatType& t,
                              const std::string& column) {
  try {
    if (lit.kind == Literal::Kind::number) {
      switch (t.kind) {
        case StatKind::numerical: return parse_value(lit.text, t);
        case StatKind::count:
        case StatKind::binary:
          return parse_value(lit.text, t);
        case StatKind::categorical:
          return parse_value(lit.text, t);  // numeric-looking level labels
        case StatKind::ignore:
          throw Error("ignored column cannot be constrained");
      }
    }
    return parse_value(lit.text, t);
  } catch (const Error& e) {
    throw Error("column '" + column + "': " + e.what());
  }
}

inline double weighted_total(const crosscat::Ensemble& ens) {
  double t = 0.0;
  for (const auto& m : ens.members) t += m.weight;
  return t;
}

// Ensemble-averaged predictive mass of each candidate value of a discrete
// cell, conditioned on the row's other observed cells.
inline double ensemble_mass(const crosscat::Ensemble& ens, RowId r,
                            const std::map<ColumnId, Value>& givens, ColumnId c,
                            const Value& candidate, Rng& rng) {
  double total = weighted_total(ens);
  double acc = 0.0;
  for (const auto& m : ens.members) {
    double lp = crosscat::row_logpdf(m.state, r, givens, {{c, candidate}}, rng);
    acc += (m.weight / total) * std::exp(lp);
  }
  return acc;
}

struct DiscreteSummary {
  Value point;
  double confidence = 0.0;
};

inline DiscreteSummary discrete_argmax(const crosscat::Ensemble& ens, RowId r,
                                       const std::map<ColumnId, Value>& givens,
                                       ColumnId c, const StatType& t, Rng& rng) {
  DiscreteSummary out;
  double best = -1.0;
  auto consider = [&](const Value& v) {
    double mass = ensemble_mass(ens, r, givens, c, v, rng);
    if (mass > best) {
      best = mass;
      out.point = v;
      out.confidence = mass;
    }
    return mass;
  };
  if (t.kind == StatKind::categorical) {
    for (std::size_t j = 0; j < t.levels.size(); ++j)
      consider(Value::categorical(std::int64_t(j)));
  } else if (t.kind == StatKind::binary) {
    consider(Value::binary(false));
    consider(Value::binary(true));
  } else if (t.kind == StatKind::count) {
    double cum = 0.0;
    for (std::int64_t k = 0; k <= 100000; ++k) {
      cum += consider(Value::count(k));
      if (cum >= 1.0 - 1e-9 && k > 2 * std::max<std::int64_t>(out.point.as_int(), 1))
        break;
    }
  } else {
    throw Error("discrete summary on a continuous column");
  }
  return out;
}

inline std::map<ColumnId, Value> observed_givens(const PopulationSchema& schema,
                                                 const MeasurementStore& store, RowId r,
                                                 ColumnId exclude) {
  std::map<ColumnId, Value> g;
  for (const auto& [c, v] : store.row(r))
    if (c != exclude && schema.type_of(c).modeled()) g[c] = v;
  return g;
}

inline std::vector<RowId> matching_rows(const Population& p,
                                        const std::optional<Predicate>& where) {
  std::vector<RowId> out;
  for (const auto& [r, row] : p.store.rows()) {
    if (where) {
      const std::vector<std::string>* raw =
          std::size_t(r) < p.raw.rows.size() ? &p.raw.rows[std::size_t(r)] : nullptr;
      if (!eval_predicate(*where, p.schema, row, raw)) continue;
    }
    out.push_back(r);
  }
  return out;
}

inline const crosscat::Ensemble& require_ensemble(const Population& p) {
  if (!p.ensemble)
    throw Error("population '" + p.schema.name + "' has no models; INITIALIZE first");
  return *p.ensemble;
}

inline StatType datatype_from_keyword(const std::string& kw, const Population& p,
                                      const std::string& column) {
  std::string k = to_lower(kw);
  if (k == "numerical" || k == "numeric") return {StatKind::numerical, {}, false};
  if (k == "lognumerical" || k == "log_numerical") return {StatKind::numerical, {}, true};
  if (k == "count") return {StatKind::count, {}, false};
  if (k == "ignore" || k == "key") return {StatKind::ignore, {}, false};
  if (k == "binary" || k == "boolean") {
    ColumnId c = p.schema.require(column);
    std::set<std::string> distinct;
    for (const auto& row : p.raw.rows)
      if (!is_missing_marker(row[c])) distinct.insert(row[c]);
    if (distinct.size() > 2) throw Error("column '" + column + "' has more than 2 levels");
    StatType t{StatKind::binary, {}, false};
    if (distinct.size() == 2) {
      std::vector<std::string> labels(distinct.begin(), distinct.end());
      if (!(parse_integer(labels[0]) == 0 && parse_integer(labels[1]) == 1))
        t.levels = labels;
    }
    return t;
  }
  if (k == "categorical" || k == "nominal") {
    ColumnId c = p.schema.require(column);
    std::set<std::string> distinct;
    for (const auto& row : p.raw.rows)
      if (!is_missing_marker(row[c])) distinct.insert(row[c]);
    if (distinct.empty()) distinct.insert("0");
    return {StatKind::categorical,
            std::vector<std::string>(distinct.begin(), distinct.end()), false};
  }
  throw Error("unknown datatype '" + kw + "'");
}

inline void retype_column(cli::Session& s, Population& p, const std::string& column,
                          const StatType& t) {
  if (p.ensemble)
    throw Error("population '" + p.schema.name +
                "' already has models; datatypes are fixed after INITIALIZE");
  ColumnId c = p.schema.require(column);
  PopulationSchema schema = p.schema;
  schema.columns[c].type = t;
  auto ingested = ingest_table(p.raw, schema);  // re-validate every cell
  p.schema = std::move(ingested.schema);
  p.store = std::move(ingested.store);
  (void)s;
}

}  // namespace xdetail

class Executor {
 public:
  explicit Executor(cli::Session& session) : s_(session) {}

  QueryResult execute(const SpannedStatement& spanned) {
    return std::visit([&](const auto& stmt) { return exec(stmt); }, spanned.stmt);
  }

 private:
  cli::Session& s_;

  QueryResult status(std::string msg) {
    QueryResult r;
    r.message = std::move(msg);
    return r;
  }

  // ---- MML statements -------------------------------------------------------

  QueryResult exec(const CreatePopulation& st) {
    std::string key = to_lower(st.name);
    if (s_.populations.count(key))
      throw Error("population '" + st.name + "' already exists");
    auto ingested = ingest_csv(st.source, std::nullopt, st.name);
    Population p;
    p.schema = std::move(ingested.schema);
    p.store = std::move(ingested.store);
    p.raw = std::move(ingested.raw);
    p.schema_guessed = true;
    std::size_t rows = p.store.n_rows(), cols = p.schema.size();
    s_.populations.emplace(key, std::move(p));
    return status("created population " + st.name + ": " + std::to_string(rows) +
                  " rows, " + std::to_string(cols) + " columns");
  }

  QueryResult exec(const GuessSchemaStmt& st) {
    Population& p = s_.require(st.population);
    if (p.ensemble)
      throw Error("population already has models; schema is fixed after INITIALIZE");
    PopulationSchema guessed = guess_schema(p.raw.header, p.raw.rows, p.schema.name);
    auto ingested = ingest_table(p.raw, guessed);
    p.schema = std::move(ingested.schema);
    p.store = std::move(ingested.store);
    p.schema_guessed = true;

    QueryResult r;
    r.headers = {"column", "stattype"};
    r.types = {StatType{StatKind::ignore, {}, false}, StatType{StatKind::ignore, {}, false}};
    for (const auto& c : p.schema.columns) {
      std::string shown = stat_kind_name(c.type.kind);
      if (c.type.log_scale) shown = "numerical (log)";
      r.rows.push_back({Cell::of_text(c.name), Cell::of_text(shown)});
      r.provenance.push_back(std::nullopt);
    }
    return r;
  }

  QueryResult exec(const AlterDatatype& st) {
    Population& p = s_.require(st.population);
    StatType t = xdetail::datatype_from_keyword(st.datatype, p, st.column);
    xdetail::retype_column(s_, p, st.column, t);
    return status("column " + st.column + " set to " + to_lower(st.datatype));
  }

  QueryResult exec(const CreateDefaultMetamodel& st) {
    s_.require(st.population);
    return status("default metamodel ready for " + st.population);
  }

  QueryResult exec(const CreateComposerMetamodel& st) {
    Population& p = s_.require(st.population);
    for (const auto& o : st.overrides) {
      StatType t = xdetail::datatype_from_keyword(o.datatype, p, o.column);
      xdetail::retype_column(s_, p, o.column, t);
    }
    std::size_t attached = 0;
    for (const auto& f : st.foreign) {
      ModelForeignStmt m;
      m.population = st.population;
      m.outputs = f.outputs;
      m.inputs = f.inputs;
      m.source = f.source;
      register_foreign(p, m);
      ++attached;
    }
    return status("metamodel " + st.name + " on " + st.population + ": " +
                  std::to_string(attached) + " foreign predictors");
  }

  void register_foreign(Population& p, const ModelForeignStmt& st) {
    foreign::ForeignSpec spec;
    spec.registry_key = st.source;
    for (const auto& c : st.outputs) spec.outputs.push_back(p.schema.require(c));
    for (const auto& c : st.inputs) spec.inputs.push_back(p.schema.require(c));
    for (ColumnId c : spec.outputs)
      if (!p.schema.type_of(c).modeled())
        throw Error("foreign output column '" + p.schema.name_of(c) + "' is ignored");
    std::vector<StatType> outs, ins;
    for (ColumnId c : spec.outputs) outs.push_back(p.schema.type_of(c));
    for (ColumnId c : spec.inputs) ins.push_back(p.schema.type_of(c));
    (void)foreign::make_foreign(spec.registry_key, outs, ins);  // resolve early
    auto specs = p.foreign_specs;
    specs.push_back(spec);
    foreign::check_acyclic(specs);
    crosscat::State::check_constraints_spec(p.schema, p.constraints, specs);

    if (p.ensemble) {
      // attach to the existing members: the output columns leave the column
      // partition and become foreign-owned
      for (auto& m : p.ensemble->members) {
        crosscat::State& state = m.state;
        for (ColumnId c : spec.outputs) {
          if (state.view_of.count(c)) state.detach_column(c);
          state.columns[c].crosscat_modeled = false;
          state.columns[c].foreign_owned = true;
        }
        state.foreign_nodes.emplace_back(spec, foreign::make_foreign(spec.registry_key,
                                                                     outs, ins));
      }
    }
    p.foreign_specs = std::move(specs);
  }

  QueryResult exec(const ModelForeignStmt& st) {
    Population& p = s_.require(st.population);
    register_foreign(p, st);
    std::string verb = p.ensemble ? "attached to existing models" : "registered";
    return status("foreign predictor " + foreign::normalize_registry_key(st.source) +
                  " " + verb + "; run ANALYZE FOREIGN PREDICTORS to fit");
  }

  QueryResult exec(const EnsureStmt& st) {
    Population& p = s_.require(st.population);
    std::vector<crosscat::DependenceConstraint> added;
    ColumnId on = p.schema.require(st.on_column);
    for (const auto& col : st.columns) {
      crosscat::DependenceConstraint m;
      m.kind = st.dependent ? crosscat::DependenceConstraint::Kind::dependent
                            : crosscat::DependenceConstraint::Kind::independent;
      m.a = p.schema.require(col);
      m.b = on;
      added.push_back(m);
    }
    auto combined = p.constraints;
    combined.insert(combined.end(), added.begin(), added.end());
    crosscat::State::check_constraints_spec(p.schema, combined, p.foreign_specs);

    if (!st.models_form) {
      if (p.ensemble)
        throw Error("models already exist; use ALTER MODELS FOR " + st.population +
                    " ENSURE ... to repair them in place");
      p.constraints = std::move(combined);
      return status("constraint registered; it will shape INITIALIZE");
    }

    // post-hoc repair: minimal column moves, then the models must be
    // re-analyzed before their answers are trusted again
    if (!p.ensemble)
      throw Error("no models to alter; use ALTER METAMODEL ... ENSURE before INITIALIZE");
    for (auto& mem : p.ensemble->members) {
      crosscat::State& state = mem.state;
      state.constraints = combined;
      for (const auto& m : added) repair_constraint(state, m);
      if (!state.constraints_satisfied())
        throw Error("constraint repair failed");  // repairs are total; defensive stop
    }
    p.constraints = std::move(combined);
    p.ensemble->stale = true;
    return status("models repaired to satisfy the constraint; marked stale until ANALYZE");
  }

  static void repair_constraint(crosscat::State& state,
                                const crosscat::DependenceConstraint& m) {
    auto va = state.view_of.at(m.a);
    auto vb = state.view_of.at(m.b);
    if (m.kind == crosscat::DependenceConstraint::Kind::dependent) {
      if (va == vb) return;
      state.detach_column(m.a);
      state.attach_column(m.a, vb);
    } else {
      if (va != vb) return;
      state.detach_column(m.a);
      crosscat::ViewId fresh = state.next_view;
      state.new_view(fresh);
      state.attach_column(m.a, fresh);
    }
  }

  QueryResult exec(const InitializeModels& st) {
    Population& p = s_.require(st.population);
    if (p.ensemble) throw Error("models already initialized for " + st.population);
    std::size_t k = s_.models_override.value_or(st.k);
    if (k == 0) throw Error("need at least one model");
    std::uint64_t seed = mix_seed(s_.seed, 0x1217, std::uint64_t(++s_.statement_counter));
    p.ensemble = crosscat::initialize_ensemble(p.schema, p.store, k, p.constraints,
                                               p.foreign_specs, seed);
    return status("initialized " + std::to_string(k) + " models for " + st.population);
  }

  QueryResult exec(const AnalyzeStmt& st) {
    std::string name = st.population.empty() ? s_.sole_population_name() : st.population;
    Population& p = s_.require(name);
    xdetail::require_ensemble(p);
    if (st.foreign_only && p.foreign_specs.empty())
      throw Error("population '" + name + "' has no foreign predictors");

    crosscat::AnalyzeOptions opts;
    opts.foreign_only = st.foreign_only;
    opts.threads = s_.threads;
    if (st.budget.wall_clock()) {
      opts.budget = {crosscat::AnalyzeBudget::Kind::seconds, st.budget.seconds()};
    } else {
      opts.budget = {crosscat::AnalyzeBudget::Kind::sweeps, st.budget.amount};
    }
    bool checkpointing = st.checkpoint.has_value();
    if (checkpointing) {
      if (st.checkpoint->wall_clock())
        opts.checkpoint_every = {crosscat::AnalyzeBudget::Kind::seconds,
                                 st.checkpoint->seconds()};
      else
        opts.checkpoint_every = {crosscat::AnalyzeBudget::Kind::sweeps,
                                 st.checkpoint->amount};
      cli::save_session(s_, s_.workspace);  // checkpoints need data + schema on disk
      opts.on_checkpoint = [&](const crosscat::Ensemble&) { cli::save_checkpoint(s_, p); };
    }
    crosscat::analyze(*p.ensemble, opts);
    if (checkpointing) cli::save_checkpoint(s_, p);
    return status("analyzed " + name + "; models have " +
                  std::to_string(p.ensemble->min_sweeps()) + "+ sweeps");
  }

  // ---- SELECT ----------------------------------------------------------------

  QueryResult exec(const SelectStmt& st) {
    Population& p = s_.require(st.population);
    auto rows = xdetail::matching_rows(p, st.where);

    bool any_count = false;
    for (const auto& it : st.items) any_count |= it.count;
    if (st.group_by || any_count) return select_aggregate(p, st, rows);

    std::vector<ColumnId> cols;
    std::vector<std::string> headers;
    for (const auto& item : st.items) {
      if (item.star) {
        for (ColumnId c = 0; c < p.schema.size(); ++c) {
          cols.push_back(c);
          headers.push_back(p.schema.name_of(c));
        }
      } else {
        ColumnId c = p.schema.require(item.column);
        cols.push_back(c);
        headers.push_back(item.alias.empty() ? p.schema.name_of(c) : item.alias);
      }
    }
    QueryResult r;
    r.headers = std::move(headers);
    for (ColumnId c : cols) r.types.push_back(p.schema.type_of(c));
    for (RowId row : rows) {
      std::vector<Cell> cells;
      for (ColumnId c : cols) cells.push_back(observed_cell(p, row, c));
      r.rows.push_back(std::move(cells));
      r.provenance.push_back(row);
    }
    order_and_limit(r, st.order_by, st.limit);
    r.check();
    return r;
  }

  Cell observed_cell(const Population& p, RowId row, ColumnId c) {
    if (p.schema.type_of(c).kind == StatKind::ignore) {
      const std::string* raw = p.raw_cell(row, c);
      if (!raw || is_missing_marker(*raw)) return Cell::null();
      return Cell::of_text(*raw);
    }
    auto v = p.store.get(row, c);
    return v ? Cell::of(*v) : Cell::null();
  }

  QueryResult select_aggregate(Population& p, const SelectStmt& st,
                               const std::vector<RowId>& rows) {
    for (const auto& item : st.items)
      if (!item.count && !st.group_by)
        throw Error("plain columns need GROUP BY when COUNT(*) is used");
    QueryResult r;
    if (!st.group_by) {
      std::string alias = "count";
      for (const auto& item : st.items)
        if (item.count && !item.alias.empty()) alias = item.alias;
      r.headers = {alias};
      r.types = {StatType{StatKind::count, {}, false}};
      r.rows.push_back({Cell::of_count(std::int64_t(rows.size()))});
      r.provenance.push_back(std::nullopt);
      return r;
    }
    ColumnId g = p.schema.require(*st.group_by);
    for (const auto& item : st.items)
      if (!item.count && !item.star && p.schema.require(item.column) != g)
        throw Error("selected column '" + item.column + "' is not the GROUP BY column");
    std::map<std::string, std::int64_t> counts;
    for (RowId row : rows) {
      Cell c = observed_cell(p, row, g);
      counts[render_cell(c, p.schema.type_of(g))] += 1;
    }
    r.headers = {p.schema.name_of(g), "count"};
    r.types = {StatType{StatKind::ignore, {}, false}, StatType{StatKind::count, {}, false}};
    for (const auto& [k, n] : counts) {
      r.rows.push_back({Cell::of_text(k), Cell::of_count(n)});
      r.provenance.push_back(std::nullopt);
    }
    order_and_limit(r, st.order_by, st.limit);
    return r;
  }

  // ---- SIMULATE ---------------------------------------------------------------

  QueryResult exec(const SimulateStmt& st) {
    Population& p = s_.require(st.population);
    const crosscat::Ensemble& ens = xdetail::require_ensemble(p);
    Rng rng = s_.statement_rng();

    std::vector<ColumnId> targets;
    for (const auto& t : st.targets) targets.push_back(p.schema.require(t));

    std::map<ColumnId, Value> assuming;
    for (const auto& a : st.assuming) {
      if (a.op != Comparison::Op::eq)
        throw Error("only equality constraints are supported in ASSUMING/GIVEN");
      ColumnId c = p.schema.require(a.column);
      if (std::find(targets.begin(), targets.end(), c) != targets.end())
        throw Error("ASSUMING column '" + a.column + "' is also a target");
      assuming[c] = xdetail::literal_to_value(a.value, p.schema.type_of(c), a.column);
    }

    // W: rows passing the filter, or one hypothetical row when no filter
    std::vector<RowId> world;
    bool hypothetical = !st.where.has_value();
    if (hypothetical)
      world.push_back(p.store.fresh_row_id());
    else
      world = xdetail::matching_rows(p, st.where);

    QueryResult r;
    for (ColumnId c : targets) {
      r.headers.push_back(p.schema.name_of(c));
      r.types.push_back(p.schema.type_of(c));
    }
    for (RowId row : world) {
      std::map<ColumnId, Value> givens = assuming;
      if (!hypothetical) {
        for (const auto& [c, v] : p.store.row(row)) {
          if (!p.schema.type_of(c).modeled()) continue;
          if (std::find(targets.begin(), targets.end(), c) != targets.end()) continue;
          givens.emplace(c, v);  // ASSUMING overrides the observed cell
        }
      }
      for (std::size_t i = 0; i < st.times; ++i) {
        const auto& member = ens.members[ens.choose(rng)];
        auto sample = crosscat::row_simulate(member.state, row, givens, targets, 1, rng);
        std::vector<Cell> cells;
        for (ColumnId c : targets) cells.push_back(Cell::of(sample[0].at(c)));
        r.rows.push_back(std::move(cells));
        r.provenance.push_back(row);
      }
    }
    r.check();
    return r;
  }

  // ---- ESTIMATE ---------------------------------------------------------------

  QueryResult exec(const EstimateStmt& st) {
    Population& p = s_.require(st.population);
    switch (st.mode) {
      case EstimateStmt::Mode::rows: return estimate_rows(p, st);
      case EstimateStmt::Mode::columns: return estimate_columns(p, st);
      case EstimateStmt::Mode::pairwise: return estimate_pairwise(p, st);
    }
    throw Error("unreachable");
  }

  static std::string estimand_header(const Estimand& e, const PopulationSchema& schema) {
    if (!e.alias.empty()) return e.alias;
    switch (e.kind) {
      case Estimand::Kind::column_value: return schema.name_of(schema.require(e.column));
      case Estimand::Kind::column_name: return "name";
      case Estimand::Kind::predictive_probability:
        return "predictive probability of " + e.column;
      case Estimand::Kind::similarity: return "similarity to " + std::to_string(e.row);
      case Estimand::Kind::dependence_probability:
        return e.column.empty() ? "dependence probability"
                                : "dependence probability with " + e.column;
      case Estimand::Kind::mutual_information:
        return e.column.empty() ? "mutual information"
                                : "mutual information with " + e.column;
    }
    return "?";
  }

  QueryResult estimate_rows(Population& p, const EstimateStmt& st) {
    const crosscat::Ensemble& ens = xdetail::require_ensemble(p);
    Rng rng = s_.statement_rng();
    auto rows = xdetail::matching_rows(p, st.where);

    QueryResult r;
    for (const auto& e : st.targets) {
      r.headers.push_back(estimand_header(e, p.schema));
      if (e.kind == Estimand::Kind::column_value)
        r.types.push_back(p.schema.type_of(p.schema.require(e.column)));
      else
        r.types.push_back(StatType{StatKind::numerical, {}, false});
    }

    for (RowId row : rows) {
      std::vector<Cell> cells;
      for (const auto& e : st.targets) {
        switch (e.kind) {
          case Estimand::Kind::column_value: {
            cells.push_back(observed_cell(p, row, p.schema.require(e.column)));
            break;
          }
          case Estimand::Kind::predictive_probability: {
            ColumnId c = p.schema.require(e.column);
            if (!p.store.get(row, c)) {
              cells.push_back(Cell::null());  // nothing observed to evaluate
              break;
            }
            double lp = crosscat::predictive_probability(ens, row, c, rng);
            cells.push_back(Cell::of_real(std::exp(lp)));
            break;
          }
          case Estimand::Kind::similarity: {
            std::vector<ColumnId> ctx;
            for (const auto& name : e.context) ctx.push_back(p.schema.require(name));
            cells.push_back(Cell::of_real(crosscat::row_similarity(ens, row, e.row, ctx)));
            break;
          }
          default:
            throw Error("estimand '" + estimand_header(e, p.schema) +
                        "' quantifies over columns; use FROM COLUMNS OF");
        }
      }
      r.rows.push_back(std::move(cells));
      r.provenance.push_back(row);
    }
    order_and_limit(r, st.order_by, st.limit);
    r.check();
    return r;
  }

  QueryResult estimate_columns(Population& p, const EstimateStmt& st) {
    const crosscat::Ensemble& ens = xdetail::require_ensemble(p);
    Rng rng = s_.statement_rng();

    QueryResult r;
    for (const auto& e : st.targets) {
      if (e.kind == Estimand::Kind::column_value && to_lower(e.column) != "name")
        throw Error("estimand '" + e.column + "' quantifies over rows; drop COLUMNS OF");
      r.headers.push_back(estimand_header(e, p.schema));
      bool is_name = e.kind == Estimand::Kind::column_name ||
                     e.kind == Estimand::Kind::column_value;
      r.types.push_back(is_name ? StatType{StatKind::ignore, {}, false}
                                : StatType{StatKind::numerical, {}, false});
    }

    std::vector<std::pair<std::vector<Cell>, PredicateEnv>> built;
    for (ColumnId c = 0; c < p.schema.size(); ++c) {
      if (!p.schema.type_of(c).modeled()) continue;
      std::vector<Cell> cells;
      PredicateEnv env;
      env["name"] = p.schema.name_of(c);
      for (std::size_t i = 0; i < st.targets.size(); ++i) {
        const Estimand& e = st.targets[i];
        Cell cell;
        switch (e.kind) {
          case Estimand::Kind::column_name:
          case Estimand::Kind::column_value:
            cell = Cell::of_text(p.schema.name_of(c));
            break;
          case Estimand::Kind::dependence_probability: {
            if (e.column.empty())
              throw Error("DEPENDENCE PROBABILITY needs WITH <column> outside PAIRWISE");
            ColumnId with = p.schema.require(e.column);
            cell = Cell::of_real(crosscat::dependence_probability(ens, c, with));
            break;
          }
          case Estimand::Kind::mutual_information: {
            if (e.column.empty())
              throw Error("MUTUAL INFORMATION needs WITH <column> outside PAIRWISE");
            ColumnId with = p.schema.require(e.column);
            cell = Cell::of_real(
                crosscat::mutual_information(ens, c, with, kMiSamples, rng).value);
            break;
          }
          default:
            throw Error("estimand '" + estimand_header(e, p.schema) +
                        "' quantifies over rows; drop COLUMNS OF");
        }
        if (cell.kind == Cell::Kind::text) env[to_lower(r.headers[i])] = cell.text;
        else if (cell.kind == Cell::Kind::value) env[to_lower(r.headers[i])] = cell.value.real_v;
        cells.push_back(std::move(cell));
      }
      built.emplace_back(std::move(cells), std::move(env));
    }

    for (auto& [cells, env] : built) {
      if (st.where && !eval_predicate_env(*st.where, env)) continue;
      r.rows.push_back(std::move(cells));
      r.provenance.push_back(std::nullopt);
    }
    order_and_limit(r, st.order_by, st.limit);
    r.check();
    return r;
  }

  QueryResult estimate_pairwise(Population& p, const EstimateStmt& st) {
    const crosscat::Ensemble& ens = xdetail::require_ensemble(p);
    Rng rng = s_.statement_rng();
    if (st.targets.size() != 1)
      throw Error("PAIRWISE COLUMNS takes exactly one estimand");
    const Estimand& e = st.targets[0];
    if (e.kind != Estimand::Kind::dependence_probability &&
        e.kind != Estimand::Kind::mutual_information)
      throw Error("PAIRWISE COLUMNS supports DEPENDENCE PROBABILITY and MUTUAL INFORMATION");
    if (!e.column.empty())
      throw Error("PAIRWISE COLUMNS estimand takes no WITH column");
    if (st.where)
      throw Error("PAIRWISE COLUMNS does not take a WHERE filter");

    std::vector<ColumnId> cols;
    for (ColumnId c = 0; c < p.schema.size(); ++c)
      if (p.schema.type_of(c).modeled()) cols.push_back(c);

    std::string value_header = e.alias.empty() ? estimand_header(e, p.schema) : e.alias;
    QueryResult r;
    r.headers = {"colA", "colB", value_header};
    r.types = {StatType{StatKind::ignore, {}, false}, StatType{StatKind::ignore, {}, false},
               StatType{StatKind::numerical, {}, false}};

    std::map<std::pair<ColumnId, ColumnId>, double> cache;
    auto value_of = [&](ColumnId a, ColumnId b) {
      auto key = std::minmax(a, b);
      auto it = cache.find(key);
      if (it != cache.end()) return it->second;
      double v = e.kind == Estimand::Kind::dependence_probability
                     ? crosscat::dependence_probability(ens, key.first, key.second)
                     : crosscat::mutual_information(ens, key.first, key.second,
                                                    kMiSamples, rng)
                           .value;
      cache.emplace(key, v);
      return v;
    };
    for (ColumnId a : cols)
      for (ColumnId b : cols) {
        r.rows.push_back({Cell::of_text(p.schema.name_of(a)),
                          Cell::of_text(p.schema.name_of(b)),
                          Cell::of_real(value_of(a, b))});
        r.provenance.push_back(std::nullopt);
      }
    order_and_limit(r, st.order_by, st.limit);
    r.check();
    return r;
  }

  // ---- INFER ------------------------------------------------------------------

  QueryResult exec(const InferStmt& st) {
    Population& p = s_.require(st.population);
    const crosscat::Ensemble& ens = xdetail::require_ensemble(p);
    if (st.confidence < 0.0 || st.confidence > 1.0)
      throw Error("confidence must lie in [0, 1]");
    Rng base_rng = s_.statement_rng();
    std::uint64_t stmt_key = base_rng.next_u64();
    auto rows = xdetail::matching_rows(p, st.where);

    QueryResult r;
    for (const auto& item : st.items) {
      ColumnId c = p.schema.require(item.column);
      if (!p.schema.type_of(c).modeled())
        throw Error("column '" + item.column + "' is ignored and cannot be inferred");
      r.headers.push_back(item.predict ? item.alias
                                       : (item.alias.empty() ? p.schema.name_of(c)
                                                             : item.alias));
      r.types.push_back(p.schema.type_of(c));
      if (item.predict) {
        r.headers.push_back(item.conf_alias);
        r.types.push_back(StatType{StatKind::numerical, {}, false});
      }
    }

    std::size_t emitted = 0;
    for (RowId row : rows) {
      if (st.limit && emitted >= *st.limit) break;
      std::vector<Cell> cells;
      for (const auto& item : st.items) {
        ColumnId c = p.schema.require(item.column);
        auto observed = p.store.get(row, c);
        bool fill = st.explicit_form ? item.predict : !observed.has_value();
        if (observed && !item.predict) {
          cells.push_back(Cell::of(*observed));
          continue;
        }
        if (!fill && !observed) {
          cells.push_back(Cell::null());
          continue;
        }
        if (item.predict && observed) {
          // observed cells pass through with full confidence
          cells.push_back(Cell::of(*observed));
          cells.push_back(Cell::of_real(1.0));
          continue;
        }
        auto [point, conf] = infer_cell(p, ens, row, c, stmt_key);
        Cell value_cell = conf >= st.confidence ? Cell::of(point) : Cell::null();
        cells.push_back(value_cell);
        if (item.predict) cells.push_back(Cell::of_real(conf));
      }
      r.rows.push_back(std::move(cells));
      r.provenance.push_back(row);
      ++emitted;
    }
    r.check();
    return r;
  }

  std::pair<Value, double> infer_cell(Population& p, const crosscat::Ensemble& ens,
                                      RowId row, ColumnId c, std::uint64_t stmt_key) {
    Rng cell_rng(mix_seed(stmt_key, std::uint64_t(row) + 1, std::uint64_t(c) + 1));
    auto givens = xdetail::observed_givens(p.schema, p.store, row, c);
    const StatType& t = p.schema.type_of(c);
    if (t.kind != StatKind::numerical) {
      auto s = xdetail::discrete_argmax(ens, row, givens, c, t, cell_rng);
      return {s.point, s.confidence};
    }
    std::vector<double> draws;
    draws.reserve(kPredictiveDraws);
    for (std::size_t i = 0; i < kPredictiveDraws; ++i) {
      const auto& member = ens.members[ens.choose(cell_rng)];
      auto sample = crosscat::row_simulate(member.state, row, givens, {c}, 1, cell_rng);
      draws.push_back(sample[0].at(c).as_double());
    }
    auto summary = dp_confidence(draws, cell_rng.next_u64());
    return {Value::real(summary.point), summary.confidence};
  }

  // ---- shared ordering --------------------------------------------------------

  static double cell_sort_key(const Cell& c) {
    if (c.kind == Cell::Kind::value) {
      switch (c.value.tag) {
        case Value::Tag::real: return c.value.real_v;
        default: return double(c.value.int_v);
      }
    }
    return 0.0;
  }

  static void order_and_limit(QueryResult& r, const std::optional<OrderBySpec>& order_by,
                              const std::optional<std::size_t>& limit) {
    if (order_by) {
      std::size_t key = r.headers.size();
      for (std::size_t i = 0; i < r.headers.size(); ++i)
        if (to_lower(r.headers[i]) == to_lower(order_by->key)) key = i;
      if (key == r.headers.size())
        throw Error("ORDER BY references unknown output column '" + order_by->key + "'");
      std::vector<std::size_t> idx(r.rows.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const Cell& ca = r.rows[a][key];
        const Cell& cb = r.rows[b][key];
        bool ma = ca.kind == Cell::Kind::missing;
        bool mb = cb.kind == Cell::Kind::missing;
        if (ma != mb) return mb;  // missing sorts last
        if (ma) return false;
        if (ca.kind == Cell::Kind::text || cb.kind == Cell::Kind::text) {
          const std::string ta = ca.kind == Cell::Kind::text ? ca.text : "";
          const std::string tb = cb.kind == Cell::Kind::text ? cb.text : "";
          return order_by->ascending ? ta < tb : tb < ta;
        }
        double ka = cell_sort_key(ca), kb = cell_sort_key(cb);
        return order_by->ascending ? ka < kb : kb < ka;
      });
      std::vector<std::vector<Cell>> rows;
      std::vector<std::optional<RowId>> prov;
      for (auto i : idx) {
        rows.push_back(std::move(r.rows[i]));
        prov.push_back(r.provenance.empty() ? std::nullopt : r.provenance[i]);
      }
      r.rows = std::move(rows);
      r.provenance = std::move(prov);
    }
    if (limit && r.rows.size() > *limit) {
      r.rows.resize(*limit);
      if (!r.provenance.empty()) r.provenance.resize(*limit);
    }
  }

  static constexpr std::size_t kMiSamples = 1000;
  static constexpr std::size_t kPredictiveDraws = 1000;  // draws per continuous cell
};

inline QueryResult execute(const SpannedStatement& stmt, cli::Session& session) {
  Executor ex(session);
  return ex.execute(stmt);
}

inline QueryResult execute_text(const std::string& text, cli::Session& session) {
  return execute(parse_one(text), session);
}

}  // namespace bqldb::bql
