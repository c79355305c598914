#pragma once

#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "bqldb/bql/executor.hpp"

namespace bqldb::cli {

enum class OutputFormat { table, csv, json };

inline OutputFormat format_from_name(const std::string& name) {
  if (name == "table") return OutputFormat::table;
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw Error("unknown output format '" + name + "' (table, csv or json)");
}

namespace rdetail {

inline std::string pretty_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string table_cell(const bql::Cell& c, const StatType& t) {
  switch (c.kind) {
    case bql::Cell::Kind::missing: return "???";
    case bql::Cell::Kind::text: return c.text;
    case bql::Cell::Kind::value:
      if (c.value.tag == Value::Tag::real) return pretty_double(c.value.real_v);
      return render_value(c.value, t);
  }
  return "";
}

inline std::string exact_cell(const bql::Cell& c, const StatType& t) {
  switch (c.kind) {
    case bql::Cell::Kind::missing: return "";
    case bql::Cell::Kind::text: return c.text;
    case bql::Cell::Kind::value: return render_value(c.value, t);
  }
  return "";
}

}  // namespace rdetail

inline void render_result(std::ostream& out, const bql::QueryResult& r, OutputFormat fmt) {
  if (!r.tabular()) {
    if (!r.message.empty()) out << "ok: " << r.message << "\n";
    return;
  }
  bool with_rowid = false;
  for (const auto& p : r.provenance) with_rowid |= p.has_value();

  switch (fmt) {
    case OutputFormat::table: {
      std::vector<std::vector<std::string>> cells;
      std::vector<std::string> head;
      if (with_rowid) head.push_back("rowid");
      head.insert(head.end(), r.headers.begin(), r.headers.end());
      cells.push_back(head);
      for (std::size_t i = 0; i < r.rows.size(); ++i) {
        std::vector<std::string> line;
        if (with_rowid)
          line.push_back(r.provenance[i] ? std::to_string(*r.provenance[i]) : "*");
        for (std::size_t j = 0; j < r.rows[i].size(); ++j)
          line.push_back(rdetail::table_cell(r.rows[i][j], r.types[j]));
        cells.push_back(std::move(line));
      }
      std::vector<std::size_t> width(cells[0].size(), 0);
      for (const auto& line : cells)
        for (std::size_t j = 0; j < line.size(); ++j)
          width[j] = std::max(width[j], line[j].size());
      for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t j = 0; j < cells[i].size(); ++j) {
          if (j) out << " | ";
          out << cells[i][j];
          out << std::string(width[j] - cells[i][j].size(), ' ');
        }
        out << "\n";
        if (i == 0) {
          for (std::size_t j = 0; j < width.size(); ++j) {
            if (j) out << "-+-";
            out << std::string(width[j], '-');
          }
          out << "\n";
        }
      }
      out << "(" << r.rows.size() << (r.rows.size() == 1 ? " row)" : " rows)") << "\n";
      break;
    }
    case OutputFormat::csv: {
      if (with_rowid) out << "rowid,";
      for (std::size_t j = 0; j < r.headers.size(); ++j) {
        if (j) out << ',';
        out << csv_escape(r.headers[j]);
      }
      out << '\n';
      for (std::size_t i = 0; i < r.rows.size(); ++i) {
        if (with_rowid)
          out << (r.provenance[i] ? std::to_string(*r.provenance[i]) : "") << ',';
        for (std::size_t j = 0; j < r.rows[i].size(); ++j) {
          if (j) out << ',';
          out << csv_escape(rdetail::exact_cell(r.rows[i][j], r.types[j]));
        }
        out << '\n';
      }
      break;
    }
    case OutputFormat::json: {
      nlohmann::json arr = nlohmann::json::array();
      for (std::size_t i = 0; i < r.rows.size(); ++i) {
        nlohmann::json obj = nlohmann::json::object();
        if (with_rowid) {
          if (r.provenance[i]) obj["rowid"] = *r.provenance[i];
          else obj["rowid"] = nullptr;
        }
        for (std::size_t j = 0; j < r.rows[i].size(); ++j) {
          const bql::Cell& c = r.rows[i][j];
          switch (c.kind) {
            case bql::Cell::Kind::missing: obj[r.headers[j]] = nullptr; break;
            case bql::Cell::Kind::text: obj[r.headers[j]] = c.text; break;
            case bql::Cell::Kind::value:
              switch (c.value.tag) {
                case Value::Tag::real: obj[r.headers[j]] = c.value.real_v; break;
                case Value::Tag::count: obj[r.headers[j]] = c.value.int_v; break;
                case Value::Tag::binary:
                case Value::Tag::categorical:
                  obj[r.headers[j]] = render_value(c.value, r.types[j]);
                  break;
                case Value::Tag::missing: obj[r.headers[j]] = nullptr; break;
              }
              break;
          }
        }
        arr.push_back(std::move(obj));
      }
      out << arr.dump() << "\n";
      break;
    }
  }
}

}  // namespace bqldb::cli
