#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bqldb/core/schema.hpp"
#include "bqldb/core/value.hpp"

namespace bqldb {

// Sparse observation set: at most one value per (row, column). The row index
// set is tracked explicitly, so a row whose cells are all missing still
// exists until removed. Missing cells are simply absent.
class MeasurementStore {
 public:
  using Row = std::map<ColumnId, Value>;

  bool has_row(RowId r) const { return rows_.count(r) != 0; }
  std::size_t n_rows() const { return rows_.size(); }

  const std::map<RowId, Row>& rows() const { return rows_; }

  std::vector<RowId> row_ids() const {
    std::vector<RowId> ids;
    ids.reserve(rows_.size());
    for (const auto& [r, _] : rows_) ids.push_back(r);
    return ids;
  }

  RowId fresh_row_id() const {
    return rows_.empty() ? 0 : rows_.rbegin()->first + 1;
  }

  void add_row(RowId r) {
    if (!rows_.emplace(r, Row{}).second)
      throw Error("row " + std::to_string(r) + " already exists");
  }

  void set_cell(RowId r, ColumnId c, const Value& v) {
    auto it = rows_.find(r);
    if (it == rows_.end()) throw Error("unknown row " + std::to_string(r));
    if (v.is_missing())
      it->second.erase(c);
    else
      it->second[c] = v;
  }

  void remove_row(RowId r) {
    if (rows_.erase(r) == 0) throw Error("unknown row " + std::to_string(r));
  }

  std::optional<Value> get(RowId r, ColumnId c) const {
    auto it = rows_.find(r);
    if (it == rows_.end()) return std::nullopt;
    auto jt = it->second.find(c);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
  }

  const Row& row(RowId r) const {
    auto it = rows_.find(r);
    if (it == rows_.end()) throw Error("unknown row " + std::to_string(r));
    return it->second;
  }

  std::size_t n_cells() const {
    std::size_t n = 0;
    for (const auto& [_, row] : rows_) n += row.size();
    return n;
  }

  bool operator==(const MeasurementStore&) const = default;

 private:
  std::map<RowId, Row> rows_;
};

struct Violation {
  RowId row;
  ColumnId col;
  std::string message;
};

// Non-throwing type check of every stored cell; violations are data, not errors.
inline std::vector<Violation> validate(const MeasurementStore& store,
                                       const PopulationSchema& schema) {
  std::vector<Violation> out;
  for (const auto& [r, row] : store.rows()) {
    for (const auto& [c, v] : row) {
      if (c >= schema.size()) {
        out.push_back({r, c, "cell references column out of range"});
        continue;
      }
      if (!value_matches(v, schema.type_of(c)))
        out.push_back({r, c, "value does not match column type " +
                                 std::string(stat_kind_name(schema.type_of(c).kind))});
    }
  }
  return out;
}

}  // namespace bqldb
