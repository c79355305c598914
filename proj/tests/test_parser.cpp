#include <doctest.h>

#include "bqldb/bql/parser.hpp"
#include "bqldb/core/csv.hpp"

using namespace bqldb;
using namespace bqldb::bql;

namespace {

std::vector<std::string> corpus_statements() {
  std::string text = read_file(std::string(BQLDB_SOURCE_DIR) +
                               "/tests/corpus/paper_statements.bql");
  std::vector<std::string> out;
  std::string current;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line == "%%") {
      out.push_back(current);
      current.clear();
    } else {
      current += line;
      current += '\n';
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

}  // namespace

TEST_CASE("every statement quoted in the source corpus parses") {
  auto stmts = corpus_statements();
  REQUIRE(stmts.size() >= 30);
  for (const auto& text : stmts) {
    CAPTURE(text);
    CHECK_NOTHROW(parse_one(text));
  }
}

TEST_CASE("GIVEN and ASSUMING are aliases; LIMIT and TIMES are aliases") {
  auto a = parse_one("SIMULATE x FROM t GIVEN y = 2 LIMIT 7;");
  auto b = parse_one("SIMULATE x FROM t ASSUMING y = 2 7 TIMES;");
  const auto& sa = std::get<SimulateStmt>(a.stmt);
  const auto& sb = std::get<SimulateStmt>(b.stmt);
  CHECK(sa.times == 7);
  CHECK(sb.times == 7);
  REQUIRE(sa.assuming.size() == 1);
  REQUIRE(sb.assuming.size() == 1);
  CHECK(sa.assuming[0].column == sb.assuming[0].column);
  CHECK(sa.assuming[0].op == Comparison::Op::eq);
}

TEST_CASE("simulate defaults to one sample and accepts inequality constraints") {
  auto a = parse_one("SIMULATE x FROM t");
  CHECK(std::get<SimulateStmt>(a.stmt).times == 1);
  auto b = parse_one("SIMULATE h FROM p 3 TIMES GIVEN gender = male AND age < 10");
  const auto& sb = std::get<SimulateStmt>(b.stmt);
  REQUIRE(sb.assuming.size() == 2);
  CHECK(sb.assuming[0].op == Comparison::Op::eq);
  CHECK(sb.assuming[0].value.kind == Literal::Kind::bareword);
  CHECK(sb.assuming[1].op == Comparison::Op::lt);
  CHECK(sb.assuming[1].value.num == doctest::Approx(10));
}

TEST_CASE("incomplete simulate reports position and expectation") {
  try {
    parse_one("SIMULATE x FROM");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("population name") != std::string::npos);
    CHECK(std::string(e.what()).find("end of input") != std::string::npos);
    CHECK(e.pos().line == 1);
    CHECK(e.pos().col == 16);
  }
}

TEST_CASE("keywords are case-insensitive") {
  CHECK_NOTHROW(parse_one("select a from t where b is null limit 2;"));
  CHECK_NOTHROW(parse_one("Simulate a From t Given b = 1;"));
  CHECK_NOTHROW(parse_one("initialize 4 models for t;"));
}

TEST_CASE("alter forms normalize into one AST") {
  auto a = parse_one(
      "ALTER METAMODEL FOR p MODEL o1, o2 GIVEN i1, i2 USING CUSTOM MODEL FROM m.py;");
  auto b = parse_one(
      "ALTER SCHEMA FOR p MODEL o1, o2 GIVEN i1, i2 USING FOREIGN PREDICTOR FROM m.py;");
  const auto& ma = std::get<ModelForeignStmt>(a.stmt);
  const auto& mb = std::get<ModelForeignStmt>(b.stmt);
  CHECK(ma.outputs == mb.outputs);
  CHECK(ma.inputs == mb.inputs);
  CHECK(ma.source == "m.py");
  CHECK(mb.source == "m.py");
}

TEST_CASE("ensure statements expand to pairwise constraints") {
  auto a = parse_one("ALTER METAMODEL FOR s ENSURE total, equity, base DEPENDENT ON state;");
  const auto& ea = std::get<EnsureStmt>(a.stmt);
  CHECK(ea.columns == std::vector<std::string>{"total", "equity", "base"});
  CHECK(ea.on_column == "state");
  CHECK(ea.dependent);
  CHECK_FALSE(ea.models_form);

  auto b = parse_one("ALTER MODELS FOR s ENSURE a IS NOT MARGINALLY DEPENDENT ON b;");
  const auto& eb = std::get<EnsureStmt>(b.stmt);
  CHECK(eb.models_form);
  CHECK_FALSE(eb.dependent);

  auto c = parse_one("ALTER METAMODEL FOR s ENSURE a IS MARGINALLY INDEPENDENT OF b;");
  CHECK_FALSE(std::get<EnsureStmt>(c.stmt).dependent);
}

TEST_CASE("analyze budgets and checkpoints") {
  auto a = parse_one("ANALYZE t FOR 4 MINUTES WAIT;");
  const auto& sa = std::get<AnalyzeStmt>(a.stmt);
  CHECK(sa.budget.unit == BudgetSpec::Unit::minutes);
  CHECK(sa.budget.seconds() == doctest::Approx(240.0));
  CHECK(sa.wait);

  auto b = parse_one("ANALYZE t FOR 3 HOURS CHECKPOINT EVERY 10 MINUTES;");
  const auto& sb = std::get<AnalyzeStmt>(b.stmt);
  REQUIRE(sb.checkpoint.has_value());
  CHECK(sb.checkpoint->seconds() == doctest::Approx(600.0));

  auto c = parse_one("ANALYZE t FOR 250 ITERATIONS;");
  CHECK(std::get<AnalyzeStmt>(c.stmt).budget.unit == BudgetSpec::Unit::iterations);

  auto d = parse_one("ANALYZE FOREIGN PREDICTORS FOR 1 MINUTE;");
  const auto& sd = std::get<AnalyzeStmt>(d.stmt);
  CHECK(sd.foreign_only);
  CHECK(sd.population.empty());

  auto e = parse_one("ANALYZE FOREIGN PREDICTORS FOR sats FOR 5 ITERATIONS;");
  const auto& se = std::get<AnalyzeStmt>(e.stmt);
  CHECK(se.foreign_only);
  CHECK(se.population == "sats");
}

TEST_CASE("estimate modes and estimands") {
  auto rows = parse_one(
      "ESTIMATE name, period_minutes AS tau, PREDICTIVE PROBABILITY OF period_minutes AS "
      "\"Pr[TAU]\" FROM sats ORDER BY \"Pr[TAU]\" ASCENDING LIMIT 10;");
  const auto& sr = std::get<EstimateStmt>(rows.stmt);
  CHECK(sr.mode == EstimateStmt::Mode::rows);
  REQUIRE(sr.targets.size() == 3);
  CHECK(sr.targets[2].kind == Estimand::Kind::predictive_probability);
  CHECK(sr.targets[2].alias == "Pr[TAU]");
  REQUIRE(sr.order_by.has_value());
  CHECK(sr.order_by->key == "Pr[TAU]");
  CHECK(sr.order_by->ascending);
  CHECK(sr.limit == 10);

  auto cols = parse_one(
      "ESTIMATE COLUMN NAME, PROBABILITY OF DEPENDENCE WITH height FROM COLUMNS OF p "
      "LIMIT 3;");
  const auto& sc = std::get<EstimateStmt>(cols.stmt);
  CHECK(sc.mode == EstimateStmt::Mode::columns);
  CHECK(sc.targets[0].kind == Estimand::Kind::column_name);
  CHECK(sc.targets[1].kind == Estimand::Kind::dependence_probability);
  CHECK(sc.targets[1].column == "height");

  auto pw = parse_one("ESTIMATE DEPENDENCE PROBABILITY FROM PAIRWISE COLUMNS OF p;");
  CHECK(std::get<EstimateStmt>(pw.stmt).mode == EstimateStmt::Mode::pairwise);

  auto sim = parse_one(
      "ESTIMATE SIMILARITY TO 5 WITH RESPECT TO (height, weight) AS s FROM p ORDER BY s "
      "DESC;");
  const auto& ss = std::get<EstimateStmt>(sim.stmt);
  CHECK(ss.targets[0].kind == Estimand::Kind::similarity);
  CHECK(ss.targets[0].row == 5);
  CHECK(ss.targets[0].context == std::vector<std::string>{"height", "weight"});
  CHECK_FALSE(ss.order_by->ascending);

  auto mi = parse_one("ESTIMATE MUTUAL INFORMATION WITH height FROM COLUMNS OF p;");
  CHECK(std::get<EstimateStmt>(mi.stmt).targets[0].kind ==
        Estimand::Kind::mutual_information);

  auto ob = parse_one("ESTIMATE name FROM p ORDER BY PREDICTIVE PROBABILITY OF x ASCENDING;");
  const auto& so = std::get<EstimateStmt>(ob.stmt);
  REQUIRE(so.targets.size() == 2);  // hidden order-by estimand
  CHECK(so.order_by->key == "__order_by");
}

TEST_CASE("infer forms") {
  auto a = parse_one("INFER age, flag FROM p WHERE age > 30 WITH CONFIDENCE 0.8 LIMIT 3;");
  const auto& sa = std::get<InferStmt>(a.stmt);
  CHECK_FALSE(sa.explicit_form);
  CHECK(sa.confidence == doctest::Approx(0.8));
  CHECK(sa.items.size() == 2);

  auto b = parse_one(
      "INFER EXPLICIT a, PREDICT t AS t_hat CONFIDENCE t_conf FROM p WHERE t IS NULL;");
  const auto& sb = std::get<InferStmt>(b.stmt);
  CHECK(sb.explicit_form);
  REQUIRE(sb.items.size() == 2);
  CHECK_FALSE(sb.items[0].predict);
  CHECK(sb.items[1].predict);
  CHECK(sb.items[1].alias == "t_hat");
  CHECK(sb.items[1].conf_alias == "t_conf");

  CHECK_THROWS_AS(parse_one("INFER PREDICT t AS a CONFIDENCE c FROM p;"), ParseError);
  CHECK_THROWS_AS(parse_one("INFER x FROM p WITH CONFIDENCE 1.5;"), ParseError);
}

TEST_CASE("predicates: precedence, between, like, null tests") {
  auto s = parse_one(
      "SELECT a FROM t WHERE x = 1 AND y BETWEEN 2 AND 3 OR NOT z IS MISSING;");
  const auto& sel = std::get<SelectStmt>(s.stmt);
  REQUIRE(sel.where.has_value());
  CHECK(sel.where->kind == Predicate::Kind::disj);  // OR binds loosest
  auto like = parse_one("SELECT a FROM t WHERE name LIKE 'Intl%';");
  CHECK(std::get<SelectStmt>(like.stmt).where->cmp.op == Comparison::Op::like);
  CHECK_THROWS_AS(parse_one("SELECT a FROM t WHERE name LIKE prefix;"), ParseError);
}

TEST_CASE("create population path forms") {
  auto a = parse_one("CREATE POPULATION p WITH DATA FROM some_dir/data-v2.csv;");
  CHECK(std::get<CreatePopulation>(a.stmt).source == "some_dir/data-v2.csv");
  auto b = parse_one("CREATE POPULATION p FROM 'quoted path.csv';");
  CHECK(std::get<CreatePopulation>(b.stmt).source == "quoted path.csv");
}

TEST_CASE("composer metamodel parses into foreign clauses and overrides") {
  auto a = parse_one(
      "CREATE METAMODEL m ON sats USING composer("
      "random_forest (t (CATEGORICAL) GIVEN a, b),"
      "foreign_model (source = 'keplers_laws.py', p (NUMERICAL) GIVEN q, r),"
      "default_metamodel (c CATEGORICAL, d NUMERICAL));");
  const auto& s = std::get<CreateComposerMetamodel>(a.stmt);
  REQUIRE(s.foreign.size() == 2);
  CHECK(s.foreign[0].source == "random_forest");
  CHECK(s.foreign[0].inputs == std::vector<std::string>{"a", "b"});
  CHECK(s.foreign[1].source == "keplers_laws.py");
  CHECK(s.overrides.size() == 4);  // two annotated outputs + two defaults
}

TEST_CASE("scripts split on semicolons and tolerate a missing final terminator") {
  auto stmts = parse("SELECT a FROM t; SELECT b FROM t");
  CHECK(stmts.size() == 2);
  CHECK_THROWS_AS(parse_one("SELECT a FROM t; SELECT b FROM t;"), ParseError);
  CHECK_THROWS_AS(parse_one(""), ParseError);
  CHECK_THROWS_AS(parse_one("FROBNICATE x;"), ParseError);
}

TEST_CASE("line comments are skipped") {
  auto stmts = parse("-- setup\nSELECT a FROM t; -- trailing\n-- done\n");
  CHECK(stmts.size() == 1);
}

TEST_CASE("lexer errors carry positions") {
  CHECK_THROWS_AS(parse_one("SELECT a FROM t WHERE x = 'unterminated"), ParseError);
  try {
    parse_one("SELECT a FROM\n  t WHERE x = 'oops");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.pos().line == 2);
  }
}

TEST_CASE("boolean literal predicates parse; barewords named true still compare") {
  auto f = parse_one("SIMULATE a FROM t 2 TIMES WHERE false;");
  const auto& sf = std::get<SimulateStmt>(f.stmt);
  REQUIRE(sf.where.has_value());
  CHECK(sf.where->kind == Predicate::Kind::truth);
  CHECK_FALSE(sf.where->truth_value);

  auto cmp = parse_one("SELECT a FROM t WHERE true = 1;");
  CHECK(std::get<SelectStmt>(cmp.stmt).where->kind == Predicate::Kind::cmp);

  auto rhs = parse_one("SELECT a FROM t WHERE varB = True;");
  const auto& sr = std::get<SelectStmt>(rhs.stmt);
  CHECK(sr.where->kind == Predicate::Kind::cmp);
  CHECK(sr.where->cmp.a.text == "True");
}
