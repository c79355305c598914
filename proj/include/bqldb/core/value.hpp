#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bqldb {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class StatKind { categorical, binary, count, numerical, ignore };

inline const char* stat_kind_name(StatKind k) {
  switch (k) {
    case StatKind::categorical: return "categorical";
    case StatKind::binary: return "binary";
    case StatKind::count: return "count";
    case StatKind::numerical: return "numerical";
    case StatKind::ignore: return "ignore";
  }
  return "?";
}

// A column's statistical type. `levels` is the label dictionary: required and
// non-empty for categorical, optionally two labels for binary columns whose
// raw representation is non-numeric (e.g. yes/no), empty otherwise.
struct StatType {
  StatKind kind = StatKind::numerical;
  std::vector<std::string> levels;
  bool log_scale = false;  // numerical only: model log(x), x > 0

  bool operator==(const StatType&) const = default;

  void check() const {
    if (kind == StatKind::categorical) {
      if (levels.empty()) throw Error("categorical type needs at least one level");
      for (std::size_t i = 0; i < levels.size(); ++i)
        for (std::size_t j = i + 1; j < levels.size(); ++j)
          if (levels[i] == levels[j])
            throw Error("duplicate categorical level '" + levels[i] + "'");
    } else if (kind == StatKind::binary) {
      if (!levels.empty() && levels.size() != 2)
        throw Error("binary type takes exactly two labels");
      if (levels.size() == 2 && levels[0] == levels[1])
        throw Error("binary labels must differ");
    } else if (!levels.empty()) {
      throw Error("levels only apply to categorical/binary types");
    }
    if (log_scale && kind != StatKind::numerical)
      throw Error("log scale only applies to numerical columns");
  }

  bool modeled() const { return kind != StatKind::ignore; }
};

struct Value {
  enum class Tag { missing, categorical, binary, count, real };

  Tag tag = Tag::missing;
  double real_v = 0.0;
  std::int64_t int_v = 0;

  static Value missing() { return Value{}; }
  static Value real(double x) { return Value{Tag::real, x, 0}; }
  static Value categorical(std::int64_t idx) { return Value{Tag::categorical, 0, idx}; }
  static Value binary(bool b) { return Value{Tag::binary, 0, b ? 1 : 0}; }
  static Value count(std::int64_t n) { return Value{Tag::count, 0, n}; }

  bool is_missing() const { return tag == Tag::missing; }

  // Numeric view used by the component models (categorical index, 0/1,
  // count, or raw real).
  double as_double() const {
    switch (tag) {
      case Tag::real: return real_v;
      case Tag::missing: throw Error("missing value has no numeric view");
      default: return double(int_v);
    }
  }

  std::int64_t as_int() const {
    if (tag == Tag::real || tag == Tag::missing)
      throw Error("value has no integer view");
    return int_v;
  }

  bool operator==(const Value&) const = default;
};

inline bool value_matches(const Value& v, const StatType& t) {
  switch (v.tag) {
    case Value::Tag::missing:
      return true;
    case Value::Tag::categorical:
      return t.kind == StatKind::categorical && v.int_v >= 0 &&
             std::size_t(v.int_v) < t.levels.size();
    case Value::Tag::binary:
      return t.kind == StatKind::binary && (v.int_v == 0 || v.int_v == 1);
    case Value::Tag::count:
      return t.kind == StatKind::count && v.int_v >= 0;
    case Value::Tag::real:
      return t.kind == StatKind::numerical && std::isfinite(v.real_v) &&
             (!t.log_scale || v.real_v > 0.0);
  }
  return false;
}

inline bool is_missing_marker(std::string_view raw) {
  static const std::array<std::string_view, 4> markers = {"", "nan", "null", "n/a"};
  std::string low;
  low.reserve(raw.size());
  for (char c : raw) low.push_back(char(std::tolower(static_cast<unsigned char>(c))));
  for (auto m : markers)
    if (low == m) return true;
  return false;
}

inline std::optional<double> parse_double(std::string_view s) {
  // Trim surrounding whitespace; require full consumption.
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  if (b == e) return std::nullopt;
  double out = 0.0;
  auto res = std::from_chars(s.data() + b, s.data() + e, out);
  if (res.ec != std::errc{} || res.ptr != s.data() + e) return std::nullopt;
  if (!std::isfinite(out)) return std::nullopt;
  return out;
}

inline std::optional<std::int64_t> parse_integer(std::string_view s) {
  auto d = parse_double(s);
  if (!d) return std::nullopt;
  if (*d != std::floor(*d) || std::abs(*d) > 9.0e15) return std::nullopt;
  return std::int64_t(*d);
}

// Raw cell -> typed value under a declared type. Throws on cells that do not
// validate; missing markers always map to Value::missing().
inline Value parse_value(std::string_view raw, const StatType& t) {
  if (is_missing_marker(raw)) return Value::missing();
  switch (t.kind) {
    case StatKind::ignore:
      return Value::missing();  // ignored columns carry no modeled values
    case StatKind::categorical: {
      for (std::size_t i = 0; i < t.levels.size(); ++i)
        if (t.levels[i] == raw) return Value::categorical(std::int64_t(i));
      throw Error("value '" + std::string(raw) + "' is not a declared categorical level");
    }
    case StatKind::binary: {
      if (t.levels.size() == 2) {
        if (raw == t.levels[0]) return Value::binary(false);
        if (raw == t.levels[1]) return Value::binary(true);
      }
      if (auto n = parse_integer(raw); n && (*n == 0 || *n == 1))
        return Value::binary(*n == 1);
      throw Error("value '" + std::string(raw) + "' is not a valid binary value");
    }
    case StatKind::count: {
      auto n = parse_integer(raw);
      if (!n || *n < 0)
        throw Error("value '" + std::string(raw) + "' is not a non-negative count");
      return Value::count(*n);
    }
    case StatKind::numerical: {
      auto d = parse_double(raw);
      if (!d) throw Error("value '" + std::string(raw) + "' is not numeric");
      if (t.log_scale && !(*d > 0.0))
        throw Error("log-scale column requires positive values, got '" + std::string(raw) + "'");
      return Value::real(*d);
    }
  }
  throw Error("unreachable");
}

inline std::string format_double(double x) {
  std::array<char, 40> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

// Typed value -> raw cell text; exact round trip through parse_value.
inline std::string render_value(const Value& v, const StatType& t) {
  switch (v.tag) {
    case Value::Tag::missing:
      return "";
    case Value::Tag::categorical:
      return t.levels.at(std::size_t(v.int_v));
    case Value::Tag::binary:
      if (t.levels.size() == 2) return t.levels[std::size_t(v.int_v)];
      return v.int_v ? "1" : "0";
    case Value::Tag::count:
      return std::to_string(v.int_v);
    case Value::Tag::real:
      return format_double(v.real_v);
  }
  return "";
}

}  // namespace bqldb
