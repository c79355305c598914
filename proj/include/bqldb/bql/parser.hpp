#pragma once

#include <algorithm>

#include "bqldb/bql/ast.hpp"
#include "bqldb/bql/lexer.hpp"

namespace bqldb::bql {

// Recursive-descent parser over a keyword-aware lexer. The surface syntax
// accepts the union of the dialect's variants (GIVEN/ASSUMING, LIMIT/TIMES,
// ALTER SCHEMA/ALTER METAMODEL, WITH DATA FROM/FROM) and normalizes them in
// the AST.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text), toks_(lex(text)) {}

  std::vector<SpannedStatement> parse_script() {
    std::vector<SpannedStatement> out;
    while (!at_end()) {
      while (accept_sym(";")) {}
      if (at_end()) break;
      out.push_back(parse_statement());
    }
    return out;
  }

  SpannedStatement parse_statement() {
    const Token& first = peek();
    std::size_t start_offset = first.offset;
    Statement stmt;
    if (accept_kw("CREATE")) stmt = parse_create();
    else if (accept_kw("GUESS")) stmt = parse_guess();
    else if (accept_kw("ALTER")) stmt = parse_alter();
    else if (accept_kw("INITIALIZE")) stmt = parse_initialize();
    else if (accept_kw("ANALYZE")) stmt = parse_analyze();
    else if (accept_kw("SIMULATE")) stmt = parse_simulate();
    else if (accept_kw("ESTIMATE")) stmt = parse_estimate();
    else if (accept_kw("INFER")) stmt = parse_infer();
    else if (accept_kw("SELECT")) stmt = parse_select();
    else fail("expected a statement (CREATE, GUESS, ALTER, INITIALIZE, ANALYZE, SIMULATE, ESTIMATE, INFER or SELECT)");
    std::size_t end_offset = peek().offset;
    if (!accept_sym(";") && !at_end())
      fail("expected ';' or end of input after statement");
    SpannedStatement out;
    out.stmt = std::move(stmt);
    out.pos = first.pos;
    out.text = std::string(text_.substr(start_offset, end_offset - start_offset));
    while (!out.text.empty() && std::isspace(static_cast<unsigned char>(out.text.back())))
      out.text.pop_back();
    return out;
  }

 private:
  // ---- token plumbing

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::end; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    std::string got = t.kind == Token::Kind::end ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.pos, expected + ", got " + got);
  }

  static bool kw_eq(const Token& t, std::string_view kw) {
    if (t.kind != Token::Kind::ident || t.text.size() != kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i)
      if (std::toupper(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
    return true;
  }

  bool peek_kw(std::string_view kw, std::size_t ahead = 0) const {
    return kw_eq(peek(ahead), kw);
  }
  bool accept_kw(std::string_view kw) {
    if (!peek_kw(kw)) return false;
    advance();
    return true;
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected " + std::string(kw));
  }
  bool accept_sym(std::string_view s) {
    if (peek().kind != Token::Kind::symbol || peek().text != s) return false;
    advance();
    return true;
  }
  void expect_sym(std::string_view s) {
    if (!accept_sym(s)) fail("expected '" + std::string(s) + "'");
  }

  std::string expect_ident(const std::string& what) {
    if (peek().kind != Token::Kind::ident) fail("expected " + what);
    return advance().text;
  }

  std::size_t expect_count(const std::string& what) {
    if (peek().kind != Token::Kind::number) fail("expected " + what);
    double n = advance().num;
    if (n < 0 || n != std::floor(n)) fail(what + " must be a non-negative integer");
    return std::size_t(n);
  }

  // File paths may be quoted or appear bare (name.csv); bare paths are
  // reassembled from adjacent tokens.
  std::string expect_path() {
    if (peek().kind == Token::Kind::string || peek().kind == Token::Kind::dstring)
      return advance().text;
    if (peek().kind != Token::Kind::ident && peek().kind != Token::Kind::number)
      fail("expected a file path or name");
    std::string path = advance().text;
    auto joinable = [&](const Token& t) {
      if (t.kind == Token::Kind::ident || t.kind == Token::Kind::number) return true;
      if (t.kind != Token::Kind::symbol) return false;
      return t.text == "." || t.text == "/" || t.text == "-" || t.text == "\\";
    };
    while (joinable(peek()) && peek().offset == toks_[pos_ - 1].end_offset())
      path += advance().text;
    return path;
  }

  std::string accept_alias() {
    if (accept_kw("AS")) {
      if (peek().kind == Token::Kind::ident || peek().kind == Token::Kind::string ||
          peek().kind == Token::Kind::dstring)
        return advance().text;
      fail("expected an alias after AS");
    }
    return "";
  }

  // ---- literals and predicates

  Literal parse_literal() {
    if (accept_sym("-")) {
      if (peek().kind != Token::Kind::number) fail("expected a number after '-'");
      const Token& t = advance();
      return Literal{Literal::Kind::number, "-" + t.text, -t.num};
    }
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::number:
        advance();
        return Literal{Literal::Kind::number, t.text, t.num};
      case Token::Kind::string:
      case Token::Kind::dstring:
        advance();
        return Literal{Literal::Kind::string, t.text, 0.0};
      case Token::Kind::ident:
        advance();
        return Literal{Literal::Kind::bareword, t.text, 0.0};
      default:
        fail("expected a value");
    }
  }

  std::string parse_column_ref() {
    if (peek().kind == Token::Kind::dstring) return advance().text;
    return expect_ident("a column name");
  }

  Comparison parse_comparison() {
    Comparison c;
    c.column = parse_column_ref();
    if (accept_kw("IS")) {
      bool neg = accept_kw("NOT");
      if (!accept_kw("NULL") && !accept_kw("MISSING"))
        fail("expected NULL or MISSING after IS");
      c.op = neg ? Comparison::Op::is_not_null : Comparison::Op::is_null;
      return c;
    }
    if (accept_kw("BETWEEN")) {
      c.op = Comparison::Op::between;
      c.a = parse_literal();
      expect_kw("AND");
      c.b = parse_literal();
      return c;
    }
    if (accept_kw("LIKE")) {
      c.op = Comparison::Op::like;
      if (peek().kind != Token::Kind::string && peek().kind != Token::Kind::dstring)
        fail("expected a quoted pattern after LIKE");
      c.a = Literal{Literal::Kind::string, advance().text, 0.0};
      return c;
    }
    if (accept_sym("=")) c.op = Comparison::Op::eq;
    else if (accept_sym("!=") || accept_sym("<>")) c.op = Comparison::Op::ne;
    else if (accept_sym("<=")) c.op = Comparison::Op::le;
    else if (accept_sym(">=")) c.op = Comparison::Op::ge;
    else if (accept_sym("<")) c.op = Comparison::Op::lt;
    else if (accept_sym(">")) c.op = Comparison::Op::gt;
    else fail("expected a comparison operator");
    c.a = parse_literal();
    return c;
  }

  Predicate parse_predicate() { return parse_or(); }

  Predicate parse_or() {
    Predicate p = parse_and();
    while (accept_kw("OR")) {
      Predicate q;
      q.kind = Predicate::Kind::disj;
      q.children.push_back(std::move(p));
      q.children.push_back(parse_and());
      p = std::move(q);
    }
    return p;
  }

  Predicate parse_and() {
    Predicate p = parse_not();
    while (accept_kw("AND")) {
      Predicate q;
      q.kind = Predicate::Kind::conj;
      q.children.push_back(std::move(p));
      q.children.push_back(parse_not());
      p = std::move(q);
    }
    return p;
  }

  Predicate parse_not() {
    if (accept_kw("NOT")) {
      Predicate p;
      p.kind = Predicate::Kind::neg;
      p.children.push_back(parse_not());
      return p;
    }
    if (accept_sym("(")) {
      Predicate p = parse_or();
      expect_sym(")");
      return p;
    }
    // TRUE/FALSE parse as literal predicates unless they name a column in a
    // comparison ("true = 1" stays a comparison)
    if ((peek_kw("TRUE") || peek_kw("FALSE")) && !comparison_follows(1)) {
      Predicate p;
      p.kind = Predicate::Kind::truth;
      p.truth_value = peek_kw("TRUE");
      advance();
      return p;
    }
    Predicate p;
    p.kind = Predicate::Kind::cmp;
    p.cmp = parse_comparison();
    return p;
  }

  bool comparison_follows(std::size_t ahead) const {
    const Token& t = peek(ahead);
    if (t.kind == Token::Kind::symbol)
      return t.text == "=" || t.text == "<" || t.text == ">" || t.text == "<=" ||
             t.text == ">=" || t.text == "!=" || t.text == "<>";
    return kw_eq(t, "IS") || kw_eq(t, "BETWEEN") || kw_eq(t, "LIKE");
  }

  // ---- statements

  Statement parse_create() {
    if (accept_kw("POPULATION")) {
      CreatePopulation s;
      s.name = expect_ident("a population name");
      if (accept_kw("WITH")) {
        expect_kw("DATA");
        expect_kw("FROM");
      } else {
        expect_kw("FROM");
      }
      s.source = expect_path();
      return s;
    }
    if (accept_kw("DEFAULT")) {
      expect_kw("METAMODEL");
      expect_kw("FOR");
      CreateDefaultMetamodel s;
      s.population = expect_ident("a population name");
      return s;
    }
    if (accept_kw("METAMODEL")) {
      CreateComposerMetamodel s;
      s.name = expect_ident("a metamodel name");
      expect_kw("ON");
      s.population = expect_ident("a population name");
      expect_kw("USING");
      expect_kw("COMPOSER");
      expect_sym("(");
      while (!accept_sym(")")) {
        parse_composer_clause(s);
        accept_sym(",");
      }
      return s;
    }
    fail("expected POPULATION, DEFAULT METAMODEL or METAMODEL after CREATE");
  }

  void parse_composer_clause(CreateComposerMetamodel& s) {
    if (accept_kw("RANDOM_FOREST")) {
      expect_sym("(");
      ComposerForeignClause f;
      f.source = "random_forest";
      f.outputs.push_back(expect_ident("an output column"));
      if (accept_sym("(")) {
        s.overrides.push_back({f.outputs.back(), expect_ident("a datatype")});
        expect_sym(")");
      }
      expect_kw("GIVEN");
      f.inputs.push_back(expect_ident("an input column"));
      while (accept_sym(",")) f.inputs.push_back(expect_ident("an input column"));
      expect_sym(")");
      s.foreign.push_back(std::move(f));
      return;
    }
    if (accept_kw("FOREIGN_MODEL")) {
      expect_sym("(");
      ComposerForeignClause f;
      expect_kw("SOURCE");
      expect_sym("=");
      if (peek().kind != Token::Kind::string && peek().kind != Token::Kind::dstring)
        fail("expected a quoted source after source =");
      f.source = advance().text;
      expect_sym(",");
      f.outputs.push_back(expect_ident("an output column"));
      if (accept_sym("(")) {
        s.overrides.push_back({f.outputs.back(), expect_ident("a datatype")});
        expect_sym(")");
      }
      while (accept_sym(",")) {
        f.outputs.push_back(expect_ident("an output column"));
        if (accept_sym("(")) {
          s.overrides.push_back({f.outputs.back(), expect_ident("a datatype")});
          expect_sym(")");
        }
      }
      expect_kw("GIVEN");
      f.inputs.push_back(expect_ident("an input column"));
      while (accept_sym(",")) f.inputs.push_back(expect_ident("an input column"));
      expect_sym(")");
      s.foreign.push_back(std::move(f));
      return;
    }
    if (accept_kw("DEFAULT_METAMODEL")) {
      expect_sym("(");
      do {
        ComposerDatatypeClause d;
        d.column = expect_ident("a column name");
        d.datatype = expect_ident("a datatype");
        s.overrides.push_back(std::move(d));
      } while (accept_sym(","));
      expect_sym(")");
      return;
    }
    fail("expected random_forest, foreign_model or default_metamodel");
  }

  Statement parse_guess() {
    expect_kw("POPULATION");
    expect_kw("SCHEMA");
    expect_kw("FOR");
    GuessSchemaStmt s;
    s.population = expect_ident("a population name");
    return s;
  }

  Statement parse_alter() {
    if (accept_kw("POPULATION")) {
      expect_kw("SCHEMA");
      expect_kw("FOR");
      AlterDatatype s;
      s.population = expect_ident("a population name");
      expect_kw("SET");
      expect_kw("DATATYPE");
      expect_kw("FOR");
      s.column = expect_ident("a column name");
      expect_kw("TO");
      s.datatype = expect_ident("a datatype");
      return s;
    }
    bool models_form = false;
    if (accept_kw("MODELS")) {
      models_form = true;
    } else if (!accept_kw("METAMODEL") && !accept_kw("SCHEMA")) {
      fail("expected POPULATION, METAMODEL, MODELS or SCHEMA after ALTER");
    }
    expect_kw("FOR");
    std::string population = expect_ident("a population name");
    if (accept_kw("ENSURE")) {
      EnsureStmt s;
      s.population = population;
      s.models_form = models_form;
      s.columns.push_back(expect_ident("a column name"));
      while (accept_sym(",")) s.columns.push_back(expect_ident("a column name"));
      accept_kw("IS");
      accept_kw("ARE");
      bool neg = accept_kw("NOT");
      accept_kw("MARGINALLY");
      if (accept_kw("INDEPENDENT")) neg = !neg;
      else expect_kw("DEPENDENT");
      accept_kw("ON");
      accept_kw("OF");
      s.dependent = !neg;
      s.on_column = expect_ident("a column name");
      return s;
    }
    if (accept_kw("MODEL")) {
      ModelForeignStmt s;
      s.population = population;
      s.outputs.push_back(expect_ident("an output column"));
      while (accept_sym(",")) s.outputs.push_back(expect_ident("an output column"));
      expect_kw("GIVEN");
      s.inputs.push_back(expect_ident("an input column"));
      while (accept_sym(",")) s.inputs.push_back(expect_ident("an input column"));
      expect_kw("USING");
      if (accept_kw("CUSTOM")) {
        expect_kw("MODEL");
      } else {
        expect_kw("FOREIGN");
        expect_kw("PREDICTOR");
      }
      expect_kw("FROM");
      s.source = expect_path();
      return s;
    }
    fail("expected ENSURE or MODEL");
  }

  Statement parse_initialize() {
    InitializeModels s;
    s.k = expect_count("a model count");
    expect_kw("MODELS");
    expect_kw("FOR");
    s.population = expect_ident("a population name");
    return s;
  }

  BudgetSpec parse_budget() {
    BudgetSpec b;
    if (peek().kind != Token::Kind::number) fail("expected a budget amount");
    b.amount = advance().num;
    if (accept_kw("SECOND") || accept_kw("SECONDS")) b.unit = BudgetSpec::Unit::seconds;
    else if (accept_kw("MINUTE") || accept_kw("MINUTES")) b.unit = BudgetSpec::Unit::minutes;
    else if (accept_kw("HOUR") || accept_kw("HOURS")) b.unit = BudgetSpec::Unit::hours;
    else if (accept_kw("ITERATION") || accept_kw("ITERATIONS") || accept_kw("SWEEP") ||
             accept_kw("SWEEPS"))
      b.unit = BudgetSpec::Unit::iterations;
    else fail("expected a budget unit (SECONDS, MINUTES, HOURS or ITERATIONS)");
    return b;
  }

  Statement parse_analyze() {
    AnalyzeStmt s;
    if (accept_kw("FOREIGN")) {
      expect_kw("PREDICTORS");
      s.foreign_only = true;
      expect_kw("FOR");
      if (peek().kind != Token::Kind::number) {
        s.population = expect_ident("a population name");
        expect_kw("FOR");
      }
      s.budget = parse_budget();
    } else {
      s.population = expect_ident("a population name");
      expect_kw("FOR");
      s.budget = parse_budget();
    }
    for (;;) {
      if (accept_kw("WAIT")) {
        s.wait = true;
      } else if (accept_kw("CHECKPOINT")) {
        expect_kw("EVERY");
        s.checkpoint = parse_budget();
      } else {
        break;
      }
    }
    return s;
  }

  Statement parse_simulate() {
    SimulateStmt s;
    s.targets.push_back(expect_ident("a target column"));
    while (accept_sym(",")) s.targets.push_back(expect_ident("a target column"));
    expect_kw("FROM");
    s.population = expect_ident("a population name");
    bool have_times = false;
    for (;;) {
      if (accept_kw("WHERE")) {
        s.where = parse_predicate();
      } else if (accept_kw("GIVEN") || accept_kw("ASSUMING")) {
        do {
          AssumeItem item;
          item.column = expect_ident("a column name");
          if (accept_sym("=")) item.op = Comparison::Op::eq;
          else if (accept_sym("<")) item.op = Comparison::Op::lt;
          else if (accept_sym(">")) item.op = Comparison::Op::gt;
          else if (accept_sym("<=")) item.op = Comparison::Op::le;
          else if (accept_sym(">=")) item.op = Comparison::Op::ge;
          else fail("expected a constraint operator");
          item.value = parse_literal();
          s.assuming.push_back(std::move(item));
        } while (accept_sym(",") || accept_kw("AND"));
      } else if (accept_kw("LIMIT")) {
        s.times = expect_count("a sample count");
        have_times = true;
      } else if (peek().kind == Token::Kind::number && peek_kw("TIMES", 1)) {
        s.times = expect_count("a sample count");
        expect_kw("TIMES");
        have_times = true;
      } else {
        break;
      }
    }
    if (!have_times) s.times = 1;
    return s;
  }

  bool estimand_ahead() const {
    return peek_kw("PREDICTIVE") || peek_kw("PROBABILITY") || peek_kw("DEPENDENCE") ||
           peek_kw("MUTUAL") || peek_kw("SIMILARITY");
  }

  Estimand parse_estimand() {
    Estimand e;
    if (accept_kw("COLUMN")) {
      expect_kw("NAME");
      e.kind = Estimand::Kind::column_name;
      e.alias = accept_alias();
      return e;
    }
    if (accept_kw("PREDICTIVE")) {
      expect_kw("PROBABILITY");
      expect_kw("OF");
      e.kind = Estimand::Kind::predictive_probability;
      e.column = expect_ident("a column name");
      e.alias = accept_alias();
      return e;
    }
    if (accept_kw("PROBABILITY")) {
      expect_kw("OF");
      expect_kw("DEPENDENCE");
      expect_kw("WITH");
      e.kind = Estimand::Kind::dependence_probability;
      e.column = expect_ident("a column name");
      e.alias = accept_alias();
      return e;
    }
    if (accept_kw("DEPENDENCE")) {
      expect_kw("PROBABILITY");
      e.kind = Estimand::Kind::dependence_probability;
      if (accept_kw("WITH")) e.column = expect_ident("a column name");
      e.alias = accept_alias();
      return e;
    }
    if (accept_kw("MUTUAL")) {
      expect_kw("INFORMATION");
      e.kind = Estimand::Kind::mutual_information;
      if (accept_kw("WITH")) e.column = expect_ident("a column name");
      e.alias = accept_alias();
      return e;
    }
    if (accept_kw("SIMILARITY")) {
      expect_kw("TO");
      e.kind = Estimand::Kind::similarity;
      if (peek().kind != Token::Kind::number) fail("expected a row id after SIMILARITY TO");
      e.row = RowId(expect_count("a row id"));
      if (accept_kw("WITH")) {
        expect_kw("RESPECT");
        expect_kw("TO");
        if (accept_sym("(")) {
          e.context.push_back(expect_ident("a column name"));
          while (accept_sym(",")) e.context.push_back(expect_ident("a column name"));
          expect_sym(")");
        } else {
          e.context.push_back(expect_ident("a column name"));
        }
      }
      e.alias = accept_alias();
      return e;
    }
    e.kind = Estimand::Kind::column_value;
    e.column = parse_column_ref();
    e.alias = accept_alias();
    return e;
  }

  Statement parse_estimate() {
    EstimateStmt s;
    s.targets.push_back(parse_estimand());
    while (accept_sym(",")) s.targets.push_back(parse_estimand());
    expect_kw("FROM");
    if (accept_kw("PAIRWISE")) {
      expect_kw("COLUMNS");
      expect_kw("OF");
      s.mode = EstimateStmt::Mode::pairwise;
    } else if (peek_kw("COLUMNS") && peek_kw("OF", 1)) {
      advance();
      advance();
      s.mode = EstimateStmt::Mode::columns;
    } else {
      s.mode = EstimateStmt::Mode::rows;
    }
    s.population = expect_ident("a population name");
    for (;;) {
      if (accept_kw("WHERE")) {
        s.where = parse_predicate();
      } else if (accept_kw("ORDER")) {
        expect_kw("BY");
        OrderBySpec ob;
        if (estimand_ahead() || peek_kw("COLUMN")) {
          Estimand e = parse_estimand();
          e.alias = e.alias.empty() ? "__order_by" : e.alias;
          ob.key = e.alias;
          s.targets.push_back(std::move(e));
        } else {
          ob.key = parse_column_ref();
        }
        if (accept_kw("ASC") || accept_kw("ASCENDING")) ob.ascending = true;
        else if (accept_kw("DESC") || accept_kw("DESCENDING")) ob.ascending = false;
        s.order_by = ob;
      } else if (accept_kw("LIMIT")) {
        s.limit = expect_count("a row limit");
      } else {
        break;
      }
    }
    return s;
  }

  Statement parse_infer() {
    InferStmt s;
    s.explicit_form = accept_kw("EXPLICIT");
    do {
      InferItem item;
      if (accept_kw("PREDICT")) {
        if (!s.explicit_form)
          fail("PREDICT ... CONFIDENCE requires INFER EXPLICIT");
        item.predict = true;
        item.column = expect_ident("a column name");
        expect_kw("AS");
        item.alias = expect_ident("an alias");
        expect_kw("CONFIDENCE");
        item.conf_alias = expect_ident("a confidence alias");
      } else {
        item.column = expect_ident("a column name");
        item.alias = accept_alias();
      }
      s.items.push_back(std::move(item));
    } while (accept_sym(","));
    expect_kw("FROM");
    s.population = expect_ident("a population name");
    for (;;) {
      if (accept_kw("WHERE")) {
        s.where = parse_predicate();
      } else if (accept_kw("WITH")) {
        expect_kw("CONFIDENCE");
        if (peek().kind != Token::Kind::number) fail("expected a confidence level");
        s.confidence = advance().num;
        if (s.confidence < 0.0 || s.confidence > 1.0)
          fail("confidence must lie in [0, 1]");
      } else if (accept_kw("LIMIT")) {
        s.limit = expect_count("a row limit");
      } else {
        break;
      }
    }
    return s;
  }

  Statement parse_select() {
    SelectStmt s;
    if (accept_sym("*")) {
      s.items.push_back({true, false, "", ""});
    } else {
      do {
        SelectItem item;
        if (accept_kw("COUNT")) {
          expect_sym("(");
          expect_sym("*");
          expect_sym(")");
          item.count = true;
          item.alias = accept_alias();
        } else {
          item.column = parse_column_ref();
          item.alias = accept_alias();
        }
        s.items.push_back(std::move(item));
      } while (accept_sym(","));
    }
    expect_kw("FROM");
    s.population = expect_ident("a population name");
    for (;;) {
      if (accept_kw("WHERE")) {
        s.where = parse_predicate();
      } else if (accept_kw("GROUP")) {
        expect_kw("BY");
        s.group_by = expect_ident("a column name");
      } else if (accept_kw("ORDER")) {
        expect_kw("BY");
        OrderBySpec ob;
        ob.key = parse_column_ref();
        if (accept_kw("ASC") || accept_kw("ASCENDING")) ob.ascending = true;
        else if (accept_kw("DESC") || accept_kw("DESCENDING")) ob.ascending = false;
        s.order_by = ob;
      } else if (accept_kw("LIMIT")) {
        s.limit = expect_count("a row limit");
      } else {
        break;
      }
    }
    return s;
  }

  std::string_view text_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline std::vector<SpannedStatement> parse(std::string_view text) {
  return Parser(text).parse_script();
}

inline SpannedStatement parse_one(std::string_view text) {
  Parser p(text);
  auto stmts = p.parse_script();
  if (stmts.size() != 1) {
    if (stmts.empty()) throw ParseError({1, 1}, "empty statement");
    throw ParseError({1, 1}, "expected a single statement");
  }
  return std::move(stmts[0]);
}

}  // namespace bqldb::bql
