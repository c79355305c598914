#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "bqldb/core/csv.hpp"
#include "bqldb/crosscat/estimands.hpp"
#include "bqldb/crosscat/serialize.hpp"

namespace bqldb::cli {

struct Population {
  PopulationSchema schema;
  MeasurementStore store;
  RawTable raw;  // original strings, kept for re-typing and ignored columns
  bool schema_guessed = false;
  std::vector<crosscat::DependenceConstraint> constraints;  // applied at INITIALIZE
  std::vector<foreign::ForeignSpec> foreign_specs;
  std::optional<crosscat::Ensemble> ensemble;

  const std::string* raw_cell(RowId r, ColumnId c) const {
    std::size_t i = std::size_t(r);
    if (i >= raw.rows.size() || c >= raw.rows[i].size()) return nullptr;
    return &raw.rows[i][c];
  }
};

// One interactive/batch session: loaded populations, their ensembles, the
// session RNG, and the workspace directory used for persistence.
struct Session {
  std::map<std::string, Population> populations;  // keyed by lowercase name
  std::string workspace = ".";
  std::uint64_t seed = 0;
  Rng rng{0};
  std::optional<std::size_t> models_override;  // --models flag
  std::size_t threads = 0;
  std::int64_t statement_counter = 0;

  void set_seed(std::uint64_t s) {
    seed = s;
    rng = Rng(s);
    statement_counter = 0;
  }

  Population& require(const std::string& name) {
    auto it = populations.find(to_lower(name));
    if (it == populations.end()) throw Error("unknown population '" + name + "'");
    return it->second;
  }

  const std::string& sole_population_name() const {
    if (populations.size() != 1)
      throw Error("statement needs an explicit population name (session has " +
                  std::to_string(populations.size()) + " populations)");
    return populations.begin()->second.schema.name;
  }

  Rng statement_rng() {
    ++statement_counter;
    return Rng(mix_seed(seed, 0xba5e, std::uint64_t(statement_counter)));
  }
};

namespace fs = std::filesystem;

inline void write_file_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp.string(), text);
  fs::rename(tmp, path);
}

constexpr int kManifestVersion = 1;

// Workspace layout: manifest.json plus, per population, <name>.schema.json,
// <name>.csv and (when models exist) <name>.ensemble.json.
inline void save_session(const Session& s, const std::string& dir) {
  fs::create_directories(dir);
  nlohmann::json pops = nlohmann::json::array();
  for (const auto& [key, p] : s.populations) {
    std::string base = key;
    nlohmann::json pj;
    pj["name"] = p.schema.name;
    pj["schema"] = base + ".schema.json";
    pj["data"] = base + ".csv";
    pj["guessed"] = p.schema_guessed;
    nlohmann::json cons = nlohmann::json::array();
    for (const auto& m : p.constraints) cons.push_back(crosscat::constraint_to_json(m));
    pj["constraints"] = std::move(cons);
    nlohmann::json fns = nlohmann::json::array();
    for (const auto& f : p.foreign_specs)
      fns.push_back({{"key", f.registry_key}, {"outputs", f.outputs}, {"inputs", f.inputs}});
    pj["foreign"] = std::move(fns);
    if (p.ensemble) pj["ensemble"] = base + ".ensemble.json";

    write_file_atomic(fs::path(dir) / (base + ".schema.json"),
                      schema_to_json(p.schema).dump(2));
    write_file_atomic(fs::path(dir) / (base + ".csv"),
                      store_to_csv(p.store, p.schema, &p.raw));
    if (p.ensemble)
      write_file_atomic(fs::path(dir) / (base + ".ensemble.json"),
                        crosscat::ensemble_to_json(*p.ensemble).dump());
    pops.push_back(std::move(pj));
  }
  nlohmann::json manifest;
  manifest["version"] = kManifestVersion;
  manifest["seed"] = s.seed;
  manifest["populations"] = std::move(pops);
  write_file_atomic(fs::path(dir) / "manifest.json", manifest.dump(2));
}

// Writes only one population's ensemble snapshot; used at ANALYZE
// checkpoints after an initial full save.
inline void save_checkpoint(const Session& s, const Population& p) {
  fs::create_directories(s.workspace);
  std::string base = to_lower(p.schema.name);
  write_file_atomic(fs::path(s.workspace) / (base + ".ensemble.json"),
                    crosscat::ensemble_to_json(*p.ensemble).dump());
}

inline Session open_session(const std::string& dir) {
  fs::path manifest_path = fs::path(dir) / "manifest.json";
  if (!fs::exists(manifest_path))
    throw Error("no session manifest at '" + manifest_path.string() + "'");
  nlohmann::json manifest = nlohmann::json::parse(read_file(manifest_path.string()));
  if (manifest.at("version").get<int>() != kManifestVersion)
    throw Error("unsupported session manifest version");
  Session s;
  s.workspace = dir;
  s.set_seed(manifest.at("seed").get<std::uint64_t>());
  for (const auto& pj : manifest.at("populations")) {
    Population p;
    p.schema = schema_from_json(
        nlohmann::json::parse(read_file((fs::path(dir) / pj.at("schema").get<std::string>()).string())));
    auto ingested = ingest_csv((fs::path(dir) / pj.at("data").get<std::string>()).string(),
                               p.schema, p.schema.name);
    p.store = std::move(ingested.store);
    p.raw = std::move(ingested.raw);
    p.schema_guessed = pj.value("guessed", false);
    for (const auto& m : pj.at("constraints"))
      p.constraints.push_back(crosscat::constraint_from_json(m));
    for (const auto& f : pj.at("foreign")) {
      foreign::ForeignSpec spec;
      spec.registry_key = f.at("key").get<std::string>();
      spec.outputs = f.at("outputs").get<std::vector<ColumnId>>();
      spec.inputs = f.at("inputs").get<std::vector<ColumnId>>();
      p.foreign_specs.push_back(std::move(spec));
    }
    if (pj.contains("ensemble")) {
      nlohmann::json ej = nlohmann::json::parse(
          read_file((fs::path(dir) / pj.at("ensemble").get<std::string>()).string()));
      p.ensemble = crosscat::ensemble_from_json(ej, p.schema, p.store);
    }
    s.populations.emplace(to_lower(p.schema.name), std::move(p));
  }
  return s;
}

// ---- dependence-probability heatmap export ---------------------------------

// Leaf order from single-linkage agglomerative clustering of the dependence
// matrix (distance 1 - p); the usual way these matrices are displayed.
inline std::vector<std::size_t> single_linkage_order(
    const std::vector<std::vector<double>>& sim) {
  std::size_t n = sim.size();
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
  auto dist = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    double d = kPosInf;
    for (auto i : a)
      for (auto j : b) d = std::min(d, 1.0 - sim[i][j]);
    return d;
  };
  while (clusters.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = kPosInf;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double d = dist(clusters[i], clusters[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    for (auto x : clusters[bj]) clusters[bi].push_back(x);
    clusters.erase(clusters.begin() + std::ptrdiff_t(bj));
  }
  return clusters[0];
}

// N x N dependence-probability matrix (symmetric, unit diagonal, computed
// once per unordered pair) written as CSV with a name header row/column,
// plus "<path>.order" holding the clustered display order, one column name
// per line.
inline void export_heatmap(const Population& p, const std::string& path) {
  if (!p.ensemble) throw Error("population has no analyzed models to export");
  std::vector<ColumnId> cols;
  for (ColumnId c = 0; c < p.schema.size(); ++c)
    if (p.schema.type_of(c).modeled()) cols.push_back(c);
  std::size_t n = cols.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = crosscat::dependence_probability(*p.ensemble, cols[i], cols[j]);
      m[i][j] = v;
      m[j][i] = v;
    }
  std::ostringstream out;
  out << "column";
  for (std::size_t j = 0; j < n; ++j) out << ',' << csv_escape(p.schema.name_of(cols[j]));
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << csv_escape(p.schema.name_of(cols[i]));
    for (std::size_t j = 0; j < n; ++j) out << ',' << format_double(m[i][j]);
    out << '\n';
  }
  write_file_atomic(path, out.str());

  auto order = single_linkage_order(m);
  std::ostringstream ord;
  for (auto i : order) ord << p.schema.name_of(cols[i]) << '\n';
  write_file_atomic(path + ".order", ord.str());
}

}  // namespace bqldb::cli
