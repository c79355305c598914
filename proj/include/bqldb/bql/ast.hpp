#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bqldb/core/schema.hpp"

namespace bqldb::bql {

struct SourcePos {
  std::size_t line = 1;
  std::size_t col = 1;
};

struct Literal {
  enum class Kind { number, string, bareword };
  Kind kind = Kind::bareword;
  std::string text;
  double num = 0.0;
};

struct Comparison {
  enum class Op { eq, ne, lt, gt, le, ge, between, is_null, is_not_null, like };
  std::string column;
  Op op = Op::eq;
  Literal a;
  Literal b;  // upper bound for BETWEEN
};

// Boolean combination of column comparisons, evaluated over observed cells
// only; comparisons against missing cells are false except IS NULL/MISSING.
// TRUE and FALSE are admitted as literal predicates.
struct Predicate {
  enum class Kind { cmp, conj, disj, neg, truth };
  Kind kind = Kind::cmp;
  Comparison cmp;
  bool truth_value = false;
  std::vector<Predicate> children;
};

struct CreatePopulation {
  std::string name;
  std::string source;  // csv path
};

struct GuessSchemaStmt {
  std::string population;
};

struct AlterDatatype {
  std::string population;
  std::string column;
  std::string datatype;  // NUMERICAL | LOGNUMERICAL | COUNT | CATEGORICAL | BINARY | IGNORE
};

struct CreateDefaultMetamodel {
  std::string population;
  std::string metamodel_name;  // optional label
};

struct ComposerForeignClause {
  std::string source;  // registry key / file name
  std::vector<std::string> outputs;
  std::vector<std::string> inputs;
};

struct ComposerDatatypeClause {
  std::string column;
  std::string datatype;
};

struct CreateComposerMetamodel {
  std::string name;
  std::string population;
  std::vector<ComposerForeignClause> foreign;
  std::vector<ComposerDatatypeClause> overrides;
};

struct InitializeModels {
  std::size_t k = 1;
  std::string population;
};

struct BudgetSpec {
  enum class Unit { seconds, minutes, hours, iterations };
  double amount = 1;
  Unit unit = Unit::iterations;

  bool wall_clock() const { return unit != Unit::iterations; }
  double seconds() const {
    switch (unit) {
      case Unit::seconds: return amount;
      case Unit::minutes: return amount * 60.0;
      case Unit::hours: return amount * 3600.0;
      case Unit::iterations: return 0.0;
    }
    return 0.0;
  }
};

struct AnalyzeStmt {
  std::string population;  // empty: implicit (single-population session)
  bool foreign_only = false;
  BudgetSpec budget;
  std::optional<BudgetSpec> checkpoint;
  bool wait = false;
};

struct EnsureStmt {
  std::string population;
  bool models_form = false;  // ALTER MODELS ...: post-hoc repair
  bool dependent = true;
  std::vector<std::string> columns;
  std::string on_column;
};

struct ModelForeignStmt {
  std::string population;
  std::vector<std::string> outputs;
  std::vector<std::string> inputs;
  std::string source;
};

// ASSUMING/GIVEN constraint; only equality is executable, but the paper's
// surface syntax admits inequalities, so the parser accepts them and the
// executor rejects non-equality forms.
struct AssumeItem {
  std::string column;
  Comparison::Op op = Comparison::Op::eq;
  Literal value;
};

struct SimulateStmt {
  std::vector<std::string> targets;
  std::string population;
  std::optional<Predicate> where;
  std::vector<AssumeItem> assuming;
  std::size_t times = 1;
};

struct Estimand {
  enum class Kind {
    column_value,            // plain projection
    column_name,             // COLUMN NAME (column mode)
    predictive_probability,  // PREDICTIVE PROBABILITY OF col
    similarity,              // SIMILARITY TO row [WITH RESPECT TO cols]
    dependence_probability,  // [PROBABILITY OF] DEPENDENCE [PROBABILITY] WITH col
    mutual_information       // MUTUAL INFORMATION WITH col
  };
  Kind kind = Kind::column_value;
  std::string column;                // projection target or WITH column
  RowId row = 0;                     // similarity reference row
  std::vector<std::string> context;  // similarity context columns
  std::string alias;
};

struct OrderBySpec {
  std::string key;  // output column name or alias
  bool ascending = true;
};

struct EstimateStmt {
  enum class Mode { rows, columns, pairwise };
  Mode mode = Mode::rows;
  std::vector<Estimand> targets;
  std::string population;
  std::optional<Predicate> where;
  std::optional<OrderBySpec> order_by;
  std::optional<std::size_t> limit;
};

struct InferItem {
  std::string column;
  bool predict = false;  // PREDICT col AS alias CONFIDENCE conf_alias
  std::string alias;
  std::string conf_alias;
};

struct InferStmt {
  bool explicit_form = false;
  std::vector<InferItem> items;
  std::string population;
  std::optional<Predicate> where;
  double confidence = 0.0;
  std::optional<std::size_t> limit;
};

struct SelectItem {
  bool star = false;
  bool count = false;  // COUNT(*)
  std::string column;
  std::string alias;
};

struct SelectStmt {
  std::vector<SelectItem> items;
  std::string population;
  std::optional<Predicate> where;
  std::optional<std::string> group_by;
  std::optional<OrderBySpec> order_by;
  std::optional<std::size_t> limit;
};

using Statement =
    std::variant<CreatePopulation, GuessSchemaStmt, AlterDatatype, CreateDefaultMetamodel,
                 CreateComposerMetamodel, InitializeModels, AnalyzeStmt, EnsureStmt,
                 ModelForeignStmt, SimulateStmt, EstimateStmt, InferStmt, SelectStmt>;

struct SpannedStatement {
  Statement stmt;
  SourcePos pos;   // start of the statement
  std::string text;
};

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& message)
      : Error("parse error at line " + std::to_string(pos.line) + ", column " +
              std::to_string(pos.col) + ": " + message),
        pos_(pos),
        message_(message) {}

  SourcePos pos() const { return pos_; }
  const std::string& message() const { return message_; }

 private:
  SourcePos pos_;
  std::string message_;
};

}  // namespace bqldb::bql
