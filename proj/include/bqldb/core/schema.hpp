#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bqldb/core/value.hpp"
#include "bqldb/util/math.hpp"

namespace bqldb {

using ColumnId = std::uint32_t;
using RowId = std::int64_t;

inline std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(char(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

struct ColumnDecl {
  std::string name;
  StatType type;
};

struct PopulationSchema {
  std::string name;
  std::vector<ColumnDecl> columns;

  void check() const {
    if (columns.empty()) throw Error("schema needs at least one column");
    for (std::size_t i = 0; i < columns.size(); ++i) {
      columns[i].type.check();
      for (std::size_t j = i + 1; j < columns.size(); ++j)
        if (to_lower(columns[i].name) == to_lower(columns[j].name))
          throw Error("duplicate column name '" + columns[i].name + "'");
    }
  }

  // Column lookup is case-insensitive: query text and data headers disagree
  // on casing in practice.
  std::optional<ColumnId> find(std::string_view col) const {
    std::string want = to_lower(col);
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (to_lower(columns[i].name) == want) return ColumnId(i);
    return std::nullopt;
  }

  ColumnId require(std::string_view col) const {
    auto id = find(col);
    if (!id) throw Error("unknown column '" + std::string(col) + "'");
    return *id;
  }

  const StatType& type_of(ColumnId c) const { return columns.at(c).type; }
  const std::string& name_of(ColumnId c) const { return columns.at(c).name; }
  std::size_t size() const { return columns.size(); }
};

inline nlohmann::json stattype_to_json(const StatType& t) {
  nlohmann::json j;
  j["stattype"] = stat_kind_name(t.kind);
  if (!t.levels.empty()) j["levels"] = t.levels;
  if (t.log_scale) j["log_scale"] = true;
  return j;
}

inline StatType stattype_from_json(const nlohmann::json& j) {
  StatType t;
  std::string k = j.at("stattype").get<std::string>();
  if (k == "categorical") t.kind = StatKind::categorical;
  else if (k == "binary") t.kind = StatKind::binary;
  else if (k == "count") t.kind = StatKind::count;
  else if (k == "numerical") t.kind = StatKind::numerical;
  else if (k == "ignore") t.kind = StatKind::ignore;
  else throw Error("unknown stattype '" + k + "'");
  if (j.contains("levels")) t.levels = j.at("levels").get<std::vector<std::string>>();
  if (j.contains("log_scale")) t.log_scale = j.at("log_scale").get<bool>();
  t.check();
  return t;
}

inline nlohmann::json schema_to_json(const PopulationSchema& s) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : s.columns) {
    nlohmann::json j = stattype_to_json(c.type);
    j["name"] = c.name;
    cols.push_back(std::move(j));
  }
  return nlohmann::json{{"name", s.name}, {"columns", std::move(cols)}};
}

inline PopulationSchema schema_from_json(const nlohmann::json& j) {
  PopulationSchema s;
  s.name = j.at("name").get<std::string>();
  for (const auto& c : j.at("columns")) {
    ColumnDecl d;
    d.name = c.at("name").get<std::string>();
    d.type = stattype_from_json(c);
    s.columns.push_back(std::move(d));
  }
  s.check();
  return s;
}

// Fingerprint used to refuse loading an ensemble against an edited schema.
inline std::uint64_t schema_hash(const PopulationSchema& s) {
  return fnv1a(schema_to_json(s).dump());
}

}  // namespace bqldb
