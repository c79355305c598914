#pragma once

#include <variant>

#include "bqldb/bql/ast.hpp"
#include "bqldb/core/store.hpp"

namespace bqldb::bql {

// '%' wildcard match (anywhere in the pattern); everything else is literal.
inline bool like_match(std::string_view pattern, std::string_view s) {
  if (pattern.empty()) return s.empty();
  if (pattern[0] == '%') {
    for (std::size_t i = 0; i <= s.size(); ++i)
      if (like_match(pattern.substr(1), s.substr(i))) return true;
    return false;
  }
  if (s.empty() || pattern[0] != s[0]) return false;
  return like_match(pattern.substr(1), s.substr(1));
}

namespace pdetail {

inline std::optional<double> literal_as_number(const Literal& lit) {
  if (lit.kind == Literal::Kind::number) return lit.num;
  return parse_double(lit.text);
}

// Compare an observed value to a query literal under the column's type.
// Returns nullopt when the comparison is not meaningful (treated as false).
inline std::optional<int> compare_value(const Value& v, const StatType& t,
                                        const Literal& lit) {
  switch (t.kind) {
    case StatKind::numerical:
    case StatKind::count: {
      auto n = literal_as_number(lit);
      if (!n) return std::nullopt;
      double x = v.as_double();
      if (x < *n) return -1;
      if (x > *n) return 1;
      return 0;
    }
    case StatKind::binary:
    case StatKind::categorical: {
      std::string shown = render_value(v, t);
      if (shown == lit.text) return 0;
      if (auto n = literal_as_number(lit)) {
        // numeric comparison against the stored index for 0/1-style data
        double x = double(v.as_int());
        if (x < *n) return -1;
        if (x > *n) return 1;
        return 0;
      }
      return shown < lit.text ? -1 : 1;
    }
    case StatKind::ignore:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace pdetail

// WHERE evaluation over one observed row. Missing cells fail every
// comparison except IS NULL / IS MISSING. Ignored columns (present only as
// raw text) compare as strings when `raw_row` is supplied.
inline bool eval_predicate(const Predicate& p, const PopulationSchema& schema,
                           const MeasurementStore::Row& row,
                           const std::vector<std::string>* raw_row = nullptr) {
  switch (p.kind) {
    case Predicate::Kind::truth:
      return p.truth_value;
    case Predicate::Kind::conj:
      return eval_predicate(p.children[0], schema, row, raw_row) &&
             eval_predicate(p.children[1], schema, row, raw_row);
    case Predicate::Kind::disj:
      return eval_predicate(p.children[0], schema, row, raw_row) ||
             eval_predicate(p.children[1], schema, row, raw_row);
    case Predicate::Kind::neg:
      return !eval_predicate(p.children[0], schema, row, raw_row);
    case Predicate::Kind::cmp:
      break;
  }
  const Comparison& c = p.cmp;
  ColumnId col = schema.require(c.column);
  if (schema.type_of(col).kind == StatKind::ignore) {
    const std::string* raw =
        raw_row && col < raw_row->size() ? &(*raw_row)[col] : nullptr;
    bool present = raw && !is_missing_marker(*raw);
    if (c.op == Comparison::Op::is_null) return !present;
    if (c.op == Comparison::Op::is_not_null) return present;
    if (!present) return false;
    switch (c.op) {
      case Comparison::Op::like: return like_match(c.a.text, *raw);
      case Comparison::Op::eq: return *raw == c.a.text;
      case Comparison::Op::ne: return *raw != c.a.text;
      case Comparison::Op::lt: return *raw < c.a.text;
      case Comparison::Op::gt: return *raw > c.a.text;
      case Comparison::Op::le: return *raw <= c.a.text;
      case Comparison::Op::ge: return *raw >= c.a.text;
      case Comparison::Op::between:
        return *raw >= c.a.text && *raw <= c.b.text;
      default: return false;
    }
  }
  auto it = row.find(col);
  bool present = it != row.end();
  if (c.op == Comparison::Op::is_null) return !present;
  if (c.op == Comparison::Op::is_not_null) return present;
  if (!present) return false;
  const Value& v = it->second;
  const StatType& t = schema.type_of(col);
  switch (c.op) {
    case Comparison::Op::like:
      return like_match(c.a.text, render_value(v, t));
    case Comparison::Op::between: {
      auto lo = pdetail::compare_value(v, t, c.a);
      auto hi = pdetail::compare_value(v, t, c.b);
      return lo && hi && *lo >= 0 && *hi <= 0;
    }
    default: {
      auto cmp = pdetail::compare_value(v, t, c.a);
      if (!cmp) return false;
      switch (c.op) {
        case Comparison::Op::eq: return *cmp == 0;
        case Comparison::Op::ne: return *cmp != 0;
        case Comparison::Op::lt: return *cmp < 0;
        case Comparison::Op::gt: return *cmp > 0;
        case Comparison::Op::le: return *cmp <= 0;
        case Comparison::Op::ge: return *cmp >= 0;
        default: return false;
      }
    }
  }
}

// Environment-based evaluation for column-mode filters: names bind to
// numbers or strings (column name, estimand values).
using PredicateEnv = std::map<std::string, std::variant<double, std::string>>;

inline bool eval_predicate_env(const Predicate& p, const PredicateEnv& env) {
  switch (p.kind) {
    case Predicate::Kind::truth:
      return p.truth_value;
    case Predicate::Kind::conj:
      return eval_predicate_env(p.children[0], env) &&
             eval_predicate_env(p.children[1], env);
    case Predicate::Kind::disj:
      return eval_predicate_env(p.children[0], env) ||
             eval_predicate_env(p.children[1], env);
    case Predicate::Kind::neg:
      return !eval_predicate_env(p.children[0], env);
    case Predicate::Kind::cmp:
      break;
  }
  const Comparison& c = p.cmp;
  auto it = env.find(to_lower(c.column));
  if (c.op == Comparison::Op::is_null) return it == env.end();
  if (c.op == Comparison::Op::is_not_null) return it != env.end();
  if (it == env.end()) throw Error("unknown name '" + c.column + "' in filter");

  auto cmp_lit = [&](const Literal& lit) -> std::optional<int> {
    if (std::holds_alternative<double>(it->second)) {
      auto n = pdetail::literal_as_number(lit);
      if (!n) return std::nullopt;
      double x = std::get<double>(it->second);
      if (x < *n) return -1;
      if (x > *n) return 1;
      return 0;
    }
    const std::string& s = std::get<std::string>(it->second);
    if (s == lit.text) return 0;
    return s < lit.text ? -1 : 1;
  };
  switch (c.op) {
    case Comparison::Op::like:
      return std::holds_alternative<std::string>(it->second) &&
             like_match(c.a.text, std::get<std::string>(it->second));
    case Comparison::Op::between: {
      auto lo = cmp_lit(c.a), hi = cmp_lit(c.b);
      return lo && hi && *lo >= 0 && *hi <= 0;
    }
    case Comparison::Op::eq: {
      auto r = cmp_lit(c.a);
      return r && *r == 0;
    }
    case Comparison::Op::ne: {
      auto r = cmp_lit(c.a);
      return r && *r != 0;
    }
    case Comparison::Op::lt: {
      auto r = cmp_lit(c.a);
      return r && *r < 0;
    }
    case Comparison::Op::gt: {
      auto r = cmp_lit(c.a);
      return r && *r > 0;
    }
    case Comparison::Op::le: {
      auto r = cmp_lit(c.a);
      return r && *r <= 0;
    }
    case Comparison::Op::ge: {
      auto r = cmp_lit(c.a);
      return r && *r >= 0;
    }
    default:
      return false;
  }
}

}  // namespace bqldb::bql
