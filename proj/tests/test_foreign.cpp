#include <doctest.h>

#include "bqldb/foreign/kepler.hpp"
#include "bqldb/foreign/registry.hpp"
#include "bqldb/foreign/sir.hpp"

using namespace bqldb;
using namespace bqldb::foreign;

namespace {

std::vector<Value> kepler_inputs(double period, double ecc) {
  return {Value::real(period), Value::real(ecc)};
}

StatType num() { return StatType{StatKind::numerical, {}, false}; }
StatType cat(std::vector<std::string> levels) {
  return StatType{StatKind::categorical, std::move(levels), false};
}

}  // namespace

TEST_CASE("kepler: zero eccentricity collapses both output means") {
  KeplerPredictor k(5.0);
  auto [perigee, apogee] = k.means(1436.0, 0.0);
  CHECK(perigee == doctest::Approx(apogee).epsilon(1e-12));
}

TEST_CASE("kepler: vanishing noise gives deterministic outputs") {
  KeplerPredictor k(1e-9);
  Rng rng(3);
  auto draw = k.simulate(kepler_inputs(1436.0, 0.1), rng);
  auto [pm, am] = k.means(1436.0, 0.1);
  CHECK(draw[0].as_double() == doctest::Approx(pm).epsilon(1e-9));
  CHECK(draw[1].as_double() == doctest::Approx(am).epsilon(1e-9));
  CHECK(pm > am);  // high radius goes with the perigee output, as specified
}

TEST_CASE("kepler: sample means track the formula within Monte Carlo error") {
  double sigma = 40.0;
  KeplerPredictor k(sigma);
  Rng rng(5);
  auto [pm, am] = k.means(1436.0, 0.1);
  double sp = 0, sa = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto d = k.simulate(kepler_inputs(1436.0, 0.1), rng);
    sp += d[0].as_double();
    sa += d[1].as_double();
  }
  double se = 3.0 * sigma / std::sqrt(double(n));
  CHECK(std::abs(sp / n - pm) <= se);
  CHECK(std::abs(sa / n - am) <= se);
}

TEST_CASE("kepler input validation") {
  KeplerPredictor k(1.0);
  CHECK_THROWS_AS(k.means(0.0, 0.5), Error);
  CHECK_THROWS_AS(k.means(100.0, 1.0), Error);
  CHECK_THROWS_AS(k.means(100.0, 1.5), Error);
  CHECK_THROWS_AS(KeplerPredictor(0.0), Error);
}

TEST_CASE("kepler logpdf marginalizes unobserved outputs") {
  KeplerPredictor k(10.0);
  auto [pm, am] = k.means(800.0, 0.2);
  std::vector<std::optional<Value>> both = {Value::real(pm), Value::real(am)};
  std::vector<std::optional<Value>> only_first = {Value::real(pm), std::nullopt};
  auto in = kepler_inputs(800.0, 0.2);
  double lp_both = k.logpdf(both, in);
  double lp_first = k.logpdf(only_first, in);
  CHECK(lp_both == doctest::Approx(2.0 * lp_first).epsilon(1e-9));
}

TEST_CASE("kepler fit: noise-free data drives sigma to (near) zero") {
  KeplerPredictor k(50.0);
  std::vector<std::pair<std::vector<Value>, std::vector<Value>>> pairs;
  double scale = 0.0;
  Rng rng(7);
  for (int i = 0; i < 40; ++i) {
    double period = rng.uniform(100.0, 1500.0);
    double ecc = rng.uniform(0.0, 0.5);
    auto [pm, am] = k.means(period, ecc);
    pairs.push_back({kepler_inputs(period, ecc), {Value::real(pm), Value::real(am)}});
    scale = std::max({scale, std::abs(pm), std::abs(am)});
  }
  k.fit(pairs);
  CHECK(k.sigma() <= 1e-6 * scale);
  CHECK(k.fitted());
}

TEST_CASE("kepler fit: recovers a known noise scale") {
  KeplerPredictor truth(10.0);
  Rng rng(11);
  std::vector<std::pair<std::vector<Value>, std::vector<Value>>> pairs;
  for (int i = 0; i < 500; ++i) {
    double period = rng.uniform(200.0, 1500.0);
    double ecc = rng.uniform(0.0, 0.6);
    auto in = kepler_inputs(period, ecc);
    pairs.push_back({in, truth.simulate(in, rng)});
  }
  KeplerPredictor k(1.0);
  k.fit(pairs);
  CHECK(k.sigma() >= 8.0);
  CHECK(k.sigma() <= 12.0);
}

TEST_CASE("kepler fit requires two complete pairs") {
  KeplerPredictor k(1.0);
  std::vector<std::pair<std::vector<Value>, std::vector<Value>>> one = {
      {kepler_inputs(100, 0.1), {Value::real(1.0), Value::real(2.0)}}};
  CHECK_THROWS_AS(k.fit(one), Error);
}

TEST_CASE("sir: normal-normal conjugate posterior and marginal") {
  // prior theta ~ N(0,1), likelihood x | theta ~ N(theta, 1), observed x = 1
  // posterior N(0.5, 0.5); marginal density N(1; 0, 2)
  Rng rng(13);
  auto prior = std::function<double(Rng&)>([](Rng& r) { return r.normal(0.0, 1.0); });
  auto lik = std::function<double(const double&)>(
      [](const double& theta) { return log_normal_pdf(1.0, theta, 1.0); });
  auto res = sir_condition<double>(10000, prior, lik, rng);
  REQUIRE(!res.degenerate);
  double mean = 0, var = 0;
  for (double t : res.particles) mean += t;
  mean /= double(res.particles.size());
  for (double t : res.particles) var += (t - mean) * (t - mean);
  var /= double(res.particles.size());
  CHECK(std::abs(mean - 0.5) < 0.05);
  CHECK(std::abs(std::sqrt(var) - std::sqrt(0.5)) < 0.05);
  double want_marginal = std::exp(log_normal_pdf(1.0, 0.0, std::sqrt(2.0)));
  CHECK(std::abs(std::exp(res.log_marginal) - want_marginal) / want_marginal < 0.05);
  // shrinkage direction: between prior mean 0 and observation 1
  CHECK(mean > 0.0);
  CHECK(mean < 1.0);
}

TEST_CASE("sir: posterior error shrinks as the particle count grows") {
  auto prior = std::function<double(Rng&)>([](Rng& r) { return r.normal(0.0, 1.0); });
  auto lik = std::function<double(const double&)>(
      [](const double& theta) { return log_normal_pdf(1.0, theta, 1.0); });
  std::vector<double> avg_err;
  for (std::size_t particles : {100u, 1000u, 10000u}) {
    double err = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      Rng rng(mix_seed(17, particles, std::uint64_t(rep)));
      auto res = sir_condition<double>(particles, prior, lik, rng);
      double mean = 0;
      for (double t : res.particles) mean += t;
      mean /= double(res.particles.size());
      err += std::abs(mean - 0.5);
    }
    avg_err.push_back(err / 20.0);
  }
  CHECK(avg_err[1] < avg_err[0]);
  CHECK(avg_err[2] < avg_err[1]);
}

TEST_CASE("sir degeneracy and particle floor") {
  Rng rng(19);
  auto prior = std::function<double(Rng&)>([](Rng& r) { return r.uniform01(); });
  auto zero = std::function<double(const double&)>([](const double&) { return kNegInf; });
  auto res = sir_condition<double>(200, prior, zero, rng);
  CHECK(res.degenerate);
  CHECK_THROWS_AS(sir_condition<double>(50, prior, zero, rng), Error);
}

TEST_CASE("acyclicity checks reject bad compositions") {
  // self loop
  CHECK_THROWS_AS(check_acyclic({ForeignSpec{"kepler", {0}, {0}}}), Error);
  // two-node cycle
  CHECK_THROWS_AS(check_acyclic({ForeignSpec{"a", {0}, {1}}, ForeignSpec{"b", {1}, {0}}}),
                  Error);
  // duplicate producer
  CHECK_THROWS_AS(check_acyclic({ForeignSpec{"a", {0}, {1}}, ForeignSpec{"b", {0}, {2}}}),
                  Error);
  // valid chain is fine, in either declaration order
  std::vector<ForeignSpec> chain = {ForeignSpec{"b", {2}, {1}}, ForeignSpec{"a", {1}, {0}}};
  auto order = topo_order(chain);
  CHECK(order == std::vector<std::size_t>{1, 0});
}

TEST_CASE("reference discriminative: categorical output over discrete parents") {
  ReferenceDiscriminative d(cat({"lo", "hi"}), {cat({"l", "r"})});
  std::vector<std::pair<std::vector<Value>, std::vector<Value>>> pairs;
  for (int i = 0; i < 40; ++i) {
    std::int64_t parent = i % 2;
    std::int64_t out = parent;  // deterministic copy
    pairs.push_back({{Value::categorical(parent)}, {Value::categorical(out)}});
  }
  d.fit(pairs);
  std::vector<Value> in = {Value::categorical(0)};
  // +1 smoothing over 20 observations: P(match) = 21/22
  std::vector<std::optional<Value>> out0 = {Value::categorical(0)};
  std::vector<std::optional<Value>> out1 = {Value::categorical(1)};
  CHECK(std::exp(d.logpdf(out0, in)) == doctest::Approx(21.0 / 22.0).epsilon(1e-9));
  CHECK(std::exp(d.logpdf(out0, in)) + std::exp(d.logpdf(out1, in)) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("reference discriminative: monte-carlo normalization over the support") {
  ReferenceDiscriminative d(cat({"a", "b", "c"}), {num()});
  Rng rng(23);
  std::vector<std::pair<std::vector<Value>, std::vector<Value>>> pairs;
  for (int i = 0; i < 60; ++i) {
    double x = rng.normal(0, 2);
    std::int64_t out = x < -1 ? 0 : (x < 1 ? 1 : 2);
    pairs.push_back({{Value::real(x)}, {Value::categorical(out)}});
  }
  d.fit(pairs);
  for (double x : {-2.5, 0.0, 3.0}) {
    double total = 0.0;
    for (std::int64_t j = 0; j < 3; ++j) {
      std::vector<std::optional<Value>> out = {Value::categorical(j)};
      std::vector<Value> in = {Value::real(x)};
      total += std::exp(d.logpdf(out, in));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("reference discriminative: linear-gaussian numerical output") {
  ReferenceDiscriminative d(num(), {num()});
  Rng rng(29);
  std::vector<std::pair<std::vector<Value>, std::vector<Value>>> pairs;
  for (int i = 0; i < 300; ++i) {
    double x = rng.uniform(-3, 3);
    double y = 2.0 * x + 1.0 + rng.normal(0, 0.5);
    pairs.push_back({{Value::real(x)}, {Value::real(y)}});
  }
  d.fit(pairs);
  Rng rng2(31);
  std::vector<Value> at_two = {Value::real(2.0)};
  double acc = 0;
  for (int i = 0; i < 4000; ++i) acc += d.simulate(at_two, rng2)[0].as_double();
  CHECK(acc / 4000.0 == doctest::Approx(5.0).epsilon(0.03));
}

TEST_CASE("registry resolution") {
  std::vector<StatType> two_num = {num(), num()};
  CHECK(make_foreign("stochastic_kepler.py", two_num, two_num)->kind() == "kepler");
  CHECK(make_foreign("keplers_laws.py", two_num, two_num)->kind() == "kepler");
  CHECK(make_foreign("kepler", two_num, two_num)->kind() == "kepler");
  CHECK(make_foreign("infarction_regression.py", {cat({"y", "n"})}, two_num)->kind() ==
        "reference-discriminative");
  CHECK(make_foreign("random_forest", {cat({"y", "n"})}, two_num)->kind() ==
        "reference-discriminative");
  CHECK_THROWS_AS(make_foreign("mystery_model.py", two_num, two_num), Error);
  CHECK_THROWS_AS(make_foreign("kepler", {num()}, two_num), Error);  // arity
}

TEST_CASE("predictor parameter serialization round trips") {
  KeplerPredictor k(12.5, 6371.0);
  auto j = k.params_to_json();
  KeplerPredictor k2(1.0);
  k2.params_from_json(j);
  CHECK(k2.sigma() == doctest::Approx(12.5));
  CHECK(k2.r_geo() == doctest::Approx(6371.0));
}
