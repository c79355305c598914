#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bqldb/core/guess.hpp"
#include "bqldb/core/schema.hpp"
#include "bqldb/core/store.hpp"

namespace bqldb {

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC 4180: quoted fields, doubled quotes, CR LF or LF records, embedded
// newlines inside quotes.
inline RawTable parse_csv(std::string_view text) {
  RawTable t;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any = false;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    if (!any) {
      t.header = record;
      any = true;
    } else {
      t.rows.push_back(record);
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // swallowed; LF terminates the record
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw Error("csv: unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  if (!any) throw Error("csv: empty input");
  return t;
}

inline std::string csv_escape(const std::string& s) {
  bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

struct Ingested {
  PopulationSchema schema;
  MeasurementStore store;
  RawTable raw;
};

// Typed ingestion of a parsed table. Row ids are assigned 0..n-1 in file
// order; cell errors name the offending row and column.
inline Ingested ingest_table(const RawTable& raw, PopulationSchema schema) {
  schema.check();
  if (schema.size() != raw.header.size())
    throw Error("schema has " + std::to_string(schema.size()) + " columns, file has " +
                std::to_string(raw.header.size()));
  Ingested out{std::move(schema), {}, raw};
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const auto& cells = raw.rows[i];
    if (cells.size() != raw.header.size())
      throw Error("row " + std::to_string(i) + " has " + std::to_string(cells.size()) +
                  " fields, expected " + std::to_string(raw.header.size()));
    RowId r = RowId(i);
    out.store.add_row(r);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const StatType& t = out.schema.type_of(ColumnId(c));
      if (!t.modeled() && !is_missing_marker(cells[c])) {
        // ignored columns keep raw text only (in `raw`), never typed cells
        continue;
      }
      Value v;
      try {
        v = parse_value(cells[c], t);
      } catch (const Error& e) {
        throw Error("row " + std::to_string(i) + ", column '" +
                    out.schema.name_of(ColumnId(c)) + "': " + e.what());
      }
      if (!v.is_missing()) out.store.set_cell(r, ColumnId(c), v);
    }
  }
  return out;
}

inline Ingested ingest_csv(const std::string& path,
                           std::optional<PopulationSchema> schema = std::nullopt,
                           const std::string& population_name = "") {
  RawTable raw = parse_csv(read_file(path));
  PopulationSchema s =
      schema ? std::move(*schema)
             : guess_schema(raw.header, raw.rows,
                            population_name.empty() ? path : population_name);
  if (!population_name.empty()) s.name = population_name;
  return ingest_table(raw, std::move(s));
}

// Store -> CSV text. Missing cells render empty; round-trips cell-for-cell
// under the same schema (doubles are written shortest-round-trip).
inline std::string store_to_csv(const MeasurementStore& store,
                                const PopulationSchema& schema,
                                const RawTable* raw_for_ignored = nullptr) {
  std::ostringstream out;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c) out << ',';
    out << csv_escape(schema.name_of(ColumnId(c)));
  }
  out << '\n';
  std::size_t file_row = 0;
  for (const auto& [r, row] : store.rows()) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out << ',';
      const StatType& t = schema.type_of(ColumnId(c));
      if (!t.modeled()) {
        if (raw_for_ignored && std::size_t(r) < raw_for_ignored->rows.size())
          out << csv_escape(raw_for_ignored->rows[std::size_t(r)][c]);
        continue;
      }
      auto it = row.find(ColumnId(c));
      if (it != row.end()) out << csv_escape(render_value(it->second, t));
    }
    out << '\n';
    ++file_row;
  }
  return out.str();
}

}  // namespace bqldb
