#include <doctest.h>

#include "bqldb/crosscat/ensemble.hpp"
#include "bqldb/crosscat/estimands.hpp"
#include "bqldb/crosscat/gibbs.hpp"
#include "bqldb/crosscat/query.hpp"
#include "support/oracles.hpp"

using namespace bqldb;
using namespace bqldb::crosscat;

namespace {

PopulationSchema mixed_schema() {
  PopulationSchema s;
  s.name = "t";
  s.columns.push_back({"flag", StatType{StatKind::binary, {}, false}});
  s.columns.push_back({"kind", StatType{StatKind::categorical, {"a", "b", "c", "d"}, false}});
  s.columns.push_back({"x", StatType{StatKind::numerical, {}, false}});
  return s;
}

InitOptions pin(const PopulationSchema& schema, double col_alpha, double row_alpha) {
  InitOptions o;
  o.fixed_col_alpha = col_alpha;
  o.fixed_row_alpha = row_alpha;
  for (ColumnId c = 0; c < schema.size(); ++c) {
    switch (schema.type_of(c).kind) {
      case StatKind::binary: o.fixed_hypers[c] = BetaBernoulliHypers{1.0, 1.0}; break;
      case StatKind::categorical:
        o.fixed_hypers[c] =
            CategoricalHypers{0.5, std::uint32_t(schema.type_of(c).levels.size())};
        break;
      case StatKind::numerical: o.fixed_hypers[c] = NormalGammaHypers{0, 1, 2, 2}; break;
      default: break;
    }
  }
  return o;
}

}  // namespace

TEST_CASE("single forced cluster: simulate marginal equals the conjugate predictive") {
  auto schema = mixed_schema();
  auto st = State::initialize(schema, {}, {}, 3, pin(schema, 1e-9, 1e-9));
  Rng data_rng(7);
  for (RowId r = 0; r < 24; ++r) {
    std::vector<Value> vals = {Value::binary(data_rng.bernoulli(0.75)),
                               Value::categorical(std::int64_t(data_rng.uniform_index(4))),
                               Value::real(data_rng.normal(2.0, 1.0))};
    st.incorporate(r, vals);
  }
  REQUIRE(st.views.begin()->second.clusters.size() == 1);
  const Cluster& cl = st.views.at(st.view_of.at(0)).clusters.begin()->second;
  double pred1 = std::exp(log_predictive(st.columns[0].hypers, cl.stats.at(0), 1.0));

  Rng rng(11);
  RowId fresh = 100;
  auto draws = row_simulate(st, fresh, {}, {0}, 20000, rng);
  double ones = 0;
  for (auto& s : draws) ones += double(s.at(0).as_int());
  double freq = ones / 20000.0;
  // the tiny fresh-cluster mass is below the Monte Carlo resolution
  CHECK(std::abs(freq - pred1) <= 3 * std::sqrt(pred1 * (1 - pred1) / 20000.0) + 1e-6);
}

TEST_CASE("uniform categorical in a single cluster: predictive probability near log 1/K") {
  PopulationSchema schema;
  schema.name = "u";
  schema.columns.push_back({"lvl", StatType{StatKind::categorical, {"a", "b", "c", "d"}, false}});
  InitOptions opts;
  opts.fixed_col_alpha = 1.0;
  opts.fixed_row_alpha = 1e-9;  // one cluster
  opts.fixed_hypers[0] = CategoricalHypers{1.0, 4};
  MeasurementStore store;
  for (RowId r = 0; r < 400; ++r) {
    store.add_row(r);
    store.set_cell(r, 0, Value::categorical(r % 4));
  }
  auto ens = initialize_ensemble(schema, store, 2, {}, {}, 211, opts);
  Rng rng(223);
  double lp = predictive_probability(ens, 0, 0, rng);
  CHECK(lp == doctest::Approx(std::log(0.25)).epsilon(0.05));
}

TEST_CASE("categorical logpdf sums to one over the support") {
  auto schema = mixed_schema();
  auto st = State::initialize(schema, {}, {}, 5);
  Rng data_rng(13);
  for (RowId r = 0; r < 15; ++r)
    st.incorporate(r, {Value::binary(data_rng.bernoulli(0.4)),
                       Value::categorical(std::int64_t(data_rng.uniform_index(4))),
                       Value::missing()});
  Rng rng(17);
  double total = 0.0;
  for (std::int64_t j = 0; j < 4; ++j)
    total += std::exp(row_logpdf(st, 200, {}, {{1, Value::categorical(j)}}, rng));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  // conditioned on another column, still normalized
  total = 0.0;
  for (std::int64_t j = 0; j < 4; ++j)
    total += std::exp(
        row_logpdf(st, 200, {{0, Value::binary(true)}}, {{1, Value::categorical(j)}}, rng));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("givens in another view leave the logpdf unchanged") {
  auto schema = mixed_schema();
  std::vector<DependenceConstraint> cons = {
      {DependenceConstraint::Kind::independent, 0, 1}};
  auto st = State::initialize(schema, cons, {}, 19);
  Rng data_rng(23);
  for (RowId r = 0; r < 12; ++r)
    st.incorporate(r, {Value::binary(data_rng.bernoulli(0.3)),
                       Value::categorical(std::int64_t(data_rng.uniform_index(4))),
                       Value::real(data_rng.normal(0, 1))});
  REQUIRE(st.view_of.at(0) != st.view_of.at(1));
  Rng rng(29);
  double without = row_logpdf(st, 300, {}, {{1, Value::categorical(2)}}, rng);
  double with = row_logpdf(st, 300, {{0, Value::binary(true)}},
                           {{1, Value::categorical(2)}}, rng);
  CHECK(with == doctest::Approx(without).epsilon(1e-12));
}

TEST_CASE("chain rule is exact within a view") {
  auto schema = mixed_schema();
  auto st = State::initialize(schema, {}, {}, 31, pin(schema, 1e-9, 1.0));
  Rng data_rng(37);
  for (RowId r = 0; r < 20; ++r)
    st.incorporate(r, {Value::binary(data_rng.bernoulli(0.6)),
                       Value::categorical(std::int64_t(data_rng.uniform_index(4))),
                       Value::real(data_rng.normal(1.0, 2.0))});
  Rng rng(41);
  RowId fresh = 500;
  std::map<ColumnId, Value> a = {{0, Value::binary(true)}};
  std::map<ColumnId, Value> b = {{1, Value::categorical(3)}};
  std::map<ColumnId, Value> ab = {{0, Value::binary(true)}, {1, Value::categorical(3)}};
  double joint = row_logpdf(st, fresh, {}, ab, rng);
  double cond = row_logpdf(st, fresh, b, a, rng);
  double marg = row_logpdf(st, fresh, {}, b, rng);
  CHECK(joint == doctest::Approx(cond + marg).epsilon(1e-9));
}

TEST_CASE("simulate and logpdf agree in total variation") {
  auto schema = mixed_schema();
  auto st = State::initialize(schema, {}, {}, 43);
  Rng data_rng(47);
  for (RowId r = 0; r < 30; ++r) {
    bool f = data_rng.bernoulli(0.5);
    st.incorporate(r, {Value::binary(f),
                       Value::categorical(f ? std::int64_t(data_rng.uniform_index(2))
                                            : 2 + std::int64_t(data_rng.uniform_index(2))),
                       Value::missing()});
  }
  Rng rng(53);
  RowId fresh = 600;
  std::map<ColumnId, Value> given = {{0, Value::binary(true)}};
  auto draws = row_simulate(st, fresh, given, {1}, 10000, rng);
  std::map<std::int64_t, double> freq;
  for (auto& s : draws) freq[s.at(1).as_int()] += 1.0 / 10000.0;
  double tv = 0.0;
  for (std::int64_t j = 0; j < 4; ++j) {
    double p = std::exp(row_logpdf(st, fresh, given, {{1, Value::categorical(j)}}, rng));
    tv += std::abs(p - (freq.count(j) ? freq[j] : 0.0));
  }
  CHECK(tv / 2.0 <= 0.03);
}

TEST_CASE("log-scale columns: density over raw values normalizes and draws stay positive") {
  PopulationSchema schema;
  schema.name = "log";
  schema.columns.push_back({"mass", StatType{StatKind::numerical, {}, true}});
  MeasurementStore store;
  Rng data_rng(401);
  for (RowId r = 0; r < 60; ++r) {
    store.add_row(r);
    store.set_cell(r, 0, Value::real(std::exp(data_rng.normal(1.0, 0.6))));
  }
  InitOptions opts;
  opts.fixed_row_alpha = 1e-9;  // single cluster keeps the density unimodal
  auto st = State::initialize(schema, {}, {}, 402, opts, &store);
  for (const auto& [r, _] : store.rows())
    st.incorporate(r, row_values_from_store(store, 1, r));

  Rng rng(403);
  RowId fresh = 100;
  auto draws = row_simulate(st, fresh, {}, {0}, 4000, rng);
  for (const auto& d : draws) REQUIRE(d.at(0).as_double() > 0.0);

  // trapezoid integral of exp(logpdf) over the raw positive axis
  double total = 0.0;
  const int grid_n = 4000;
  double hi = 80.0;
  double h = hi / grid_n;
  for (int i = 1; i <= grid_n; ++i) {
    double x = h * i;
    double p = std::exp(row_logpdf(st, fresh, {}, {{0, Value::real(x)}}, rng));
    total += p * h;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("query validation errors") {
  auto schema = mixed_schema();
  schema.columns.push_back({"name", StatType{StatKind::ignore, {}, false}});
  auto st = State::initialize(schema, {}, {}, 59);
  st.incorporate(0, {Value::binary(true), Value::categorical(0), Value::real(0.5),
                     Value::missing()});
  Rng rng(61);
  CHECK_THROWS_AS(row_logpdf(st, 0, {}, {}, rng), Error);  // empty query
  CHECK_THROWS_AS(row_logpdf(st, 0, {{0, Value::binary(true)}},
                             {{0, Value::binary(false)}}, rng),
                  Error);  // overlap
  CHECK_THROWS_AS(row_logpdf(st, 0, {}, {{3, Value::real(1.0)}}, rng),
                  Error);  // ignored column
  CHECK_THROWS_AS(row_logpdf(st, 0, {}, {{1, Value::categorical(9)}}, rng),
                  Error);  // level out of range
  CHECK_THROWS_AS(row_simulate(st, 0, {}, {}, 3, rng), Error);
}

TEST_CASE("dependence probability: self, constrained, and structural zeros") {
  auto schema = mixed_schema();
  MeasurementStore store;
  Rng data_rng(67);
  for (RowId r = 0; r < 10; ++r) {
    store.add_row(r);
    store.set_cell(r, 0, Value::binary(data_rng.bernoulli(0.5)));
    store.set_cell(r, 1, Value::categorical(std::int64_t(data_rng.uniform_index(4))));
    store.set_cell(r, 2, Value::real(data_rng.normal(0, 1)));
  }
  std::vector<DependenceConstraint> cons = {
      {DependenceConstraint::Kind::dependent, 0, 2},
      {DependenceConstraint::Kind::independent, 0, 1}};
  auto ens = initialize_ensemble(schema, store, 8, cons, {}, 71);
  CHECK(dependence_probability(ens, 1, 1) == 1.0);
  CHECK(dependence_probability(ens, 0, 2) == 1.0);
  CHECK(dependence_probability(ens, 0, 1) == 0.0);
  AnalyzeOptions a;
  a.budget = {AnalyzeBudget::Kind::sweeps, 15};
  a.threads = 2;
  analyze(ens, a);
  CHECK(dependence_probability(ens, 0, 2) == 1.0);
  CHECK(dependence_probability(ens, 0, 1) == 0.0);
}

TEST_CASE("mutual information is exactly zero across views") {
  auto schema = mixed_schema();
  MeasurementStore store;
  Rng data_rng(73);
  for (RowId r = 0; r < 10; ++r) {
    store.add_row(r);
    store.set_cell(r, 0, Value::binary(data_rng.bernoulli(0.5)));
    store.set_cell(r, 1, Value::categorical(std::int64_t(data_rng.uniform_index(4))));
  }
  std::vector<DependenceConstraint> cons = {
      {DependenceConstraint::Kind::independent, 0, 1}};
  auto ens = initialize_ensemble(schema, store, 4, cons, {}, 79);
  Rng rng(83);
  auto mi = mutual_information(ens, 0, 1, 200, rng);
  CHECK(mi.value == 0.0);
  CHECK(mi.std_err == 0.0);
}

TEST_CASE("mutual information of dependent columns is positive with valid SE") {
  PopulationSchema schema;
  schema.name = "copy";
  schema.columns.push_back({"u", StatType{StatKind::categorical, {"a", "b", "c", "d"}, false}});
  schema.columns.push_back({"v", StatType{StatKind::categorical, {"a", "b", "c", "d"}, false}});
  MeasurementStore store;
  Rng data_rng(89);
  for (RowId r = 0; r < 80; ++r) {
    store.add_row(r);
    std::int64_t level = std::int64_t(data_rng.uniform_index(4));
    store.set_cell(r, 0, Value::categorical(level));
    store.set_cell(r, 1, Value::categorical(level));
  }
  auto ens = initialize_ensemble(schema, store, 4, {}, {}, 97);
  AnalyzeOptions a;
  a.budget = {AnalyzeBudget::Kind::sweeps, 40};
  a.threads = 2;
  analyze(ens, a);
  Rng rng(101);
  auto mi = mutual_information(ens, 0, 1, 800, rng);
  CHECK(mi.value > 0.5);  // perfect 4-level copy carries log 4 = 1.386 nats
  CHECK(mi.value + 3 * mi.std_err >= 0.0);
}

TEST_CASE("row similarity: reflexive, and separated for well-separated clusters") {
  PopulationSchema schema;
  schema.name = "sim";
  schema.columns.push_back({"x", StatType{StatKind::numerical, {}, false}});
  schema.columns.push_back({"y", StatType{StatKind::numerical, {}, false}});
  MeasurementStore store;
  Rng data_rng(103);
  for (RowId r = 0; r < 60; ++r) {
    store.add_row(r);
    double mu = r < 30 ? -8.0 : 8.0;
    store.set_cell(r, 0, Value::real(data_rng.normal(mu, 0.5)));
    store.set_cell(r, 1, Value::real(data_rng.normal(mu, 0.5)));
  }
  auto ens = initialize_ensemble(schema, store, 8, {}, {}, 107);
  AnalyzeOptions a;
  a.budget = {AnalyzeBudget::Kind::sweeps, 40};
  a.threads = 2;
  analyze(ens, a);
  CHECK(row_similarity(ens, 3, 3) == 1.0);
  CHECK(row_similarity(ens, 1, 2) >= 0.9);   // same component
  CHECK(row_similarity(ens, 1, 45) <= 0.1);  // opposite components
  CHECK_THROWS_AS(row_similarity(ens, 1, 999), Error);
}

TEST_CASE("predictive probability flags planted anomalies below consensus cells") {
  PopulationSchema schema;
  schema.name = "anom";
  schema.columns.push_back({"group", StatType{StatKind::binary, {}, false}});
  schema.columns.push_back({"period", StatType{StatKind::numerical, {}, false}});
  MeasurementStore store;
  Rng data_rng(109);
  for (RowId r = 0; r < 80; ++r) {
    store.add_row(r);
    bool geo = r % 2;
    store.set_cell(r, 0, Value::binary(geo));
    double period = geo ? data_rng.normal(1436, 5) : data_rng.normal(95, 3);
    store.set_cell(r, 1, Value::real(period));
  }
  // plant a unit error: a "geo" row with a "leo" period
  store.set_cell(3, 1, Value::real(95.0 / 60.0 * 60.0 / 60.0 + 23.0));  // ~24.6
  store.set_cell(79, 1, Value::missing());
  auto ens = initialize_ensemble(schema, store, 6, {}, {}, 113);
  AnalyzeOptions a;
  a.budget = {AnalyzeBudget::Kind::sweeps, 50};
  a.threads = 2;
  analyze(ens, a);
  Rng rng(127);
  double anomalous = predictive_probability(ens, 3, 1, rng);
  double typical = predictive_probability(ens, 5, 1, rng);
  CHECK(anomalous < typical);
  CHECK_THROWS_AS(predictive_probability(ens, 79, 1, rng), Error);  // missing cell: INFER's job
}

TEST_CASE("gpm adapter enforces the single-row contract") {
  auto schema = mixed_schema();
  auto st = State::initialize(schema, {}, {}, 131);
  st.incorporate(0, {Value::binary(true), Value::categorical(1), Value::real(0.0)});
  CrossCatGpm g(st);
  CHECK(g.schema().outputs.size() == 3);
  Rng rng(137);
  std::vector<gpm::CellRef> targets = {{5, 0}, {6, 1}};
  CHECK_THROWS_AS(g.simulate({}, targets, 2, rng), Error);
  std::vector<gpm::CellRef> ok_targets = {{5, 0}, {5, 1}};
  auto draws = g.simulate({}, ok_targets, 4, rng);
  CHECK(draws.size() == 4);
  CHECK(draws[0].size() == 2);
}
