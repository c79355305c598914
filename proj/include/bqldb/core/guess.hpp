#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "bqldb/core/schema.hpp"
#include "bqldb/core/value.hpp"

namespace bqldb {

// Heuristic column typing over raw strings. Deterministic:
//   - exactly two distinct non-missing values        -> binary
//   - >= 95% of non-missing cells parse as reals     -> count if all are
//     non-negative integers with >= 3 distinct values, else numerical
//   - distinct/total <= 0.7 and distinct count <= 50 -> categorical
//   - otherwise (e.g. free text, key columns)        -> ignore
inline StatType guess_column_type(const std::vector<std::string>& cells) {
  std::vector<std::string> present;
  for (const auto& c : cells)
    if (!is_missing_marker(c)) present.push_back(c);
  if (present.empty()) return StatType{StatKind::ignore, {}, false};

  std::set<std::string> distinct(present.begin(), present.end());

  if (distinct.size() == 2) {
    std::vector<std::string> labels(distinct.begin(), distinct.end());
    auto a = parse_double(labels[0]);
    auto b = parse_double(labels[1]);
    if (a && b && *a > *b) std::swap(labels[0], labels[1]);
    // plain 0/1 pairs need no label dictionary
    if (parse_integer(labels[0]) == 0 && parse_integer(labels[1]) == 1)
      return StatType{StatKind::binary, {}, false};
    return StatType{StatKind::binary, labels, false};
  }

  std::size_t numeric = 0;
  bool all_nonneg_int = true;
  for (const auto& c : present) {
    auto d = parse_double(c);
    if (d) {
      ++numeric;
      auto n = parse_integer(c);
      if (!n || *n < 0) all_nonneg_int = false;
    }
  }
  if (double(numeric) >= 0.95 * double(present.size())) {
    if (numeric == present.size() && all_nonneg_int && distinct.size() >= 3)
      return StatType{StatKind::count, {}, false};
    return StatType{StatKind::numerical, {}, false};
  }

  double ratio = double(distinct.size()) / double(present.size());
  if (ratio <= 0.7 && distinct.size() <= 50) {
    std::vector<std::string> levels(distinct.begin(), distinct.end());
    return StatType{StatKind::categorical, levels, false};
  }
  return StatType{StatKind::ignore, {}, false};
}

inline PopulationSchema guess_schema(const std::vector<std::string>& header,
                                     const std::vector<std::vector<std::string>>& rows,
                                     const std::string& name = "population") {
  if (header.empty()) throw Error("cannot guess schema of an empty table");
  PopulationSchema schema;
  schema.name = name;
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::vector<std::string> cells;
    cells.reserve(rows.size());
    for (const auto& row : rows) {
      if (row.size() != header.size())
        throw Error("ragged table: row has " + std::to_string(row.size()) +
                    " fields, expected " + std::to_string(header.size()));
      cells.push_back(row[c]);
    }
    schema.columns.push_back({header[c], guess_column_type(cells)});
  }
  schema.check();
  return schema;
}

}  // namespace bqldb
