#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bqldb/core/schema.hpp"
#include "bqldb/core/value.hpp"
#include "bqldb/util/rng.hpp"

namespace bqldb::foreign {

// A discriminative/causal conditional model for designated output columns
// given parent columns, composed feedforward onto the root model. Outputs
// must be conditionally independent of everything else given the parents,
// and logpdf/simulate must agree.
class ForeignPredictor {
 public:
  virtual ~ForeignPredictor() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t n_outputs() const = 0;
  virtual std::size_t n_inputs() const = 0;

  // One joint draw of all outputs given fully observed parent values.
  virtual std::vector<Value> simulate(std::span<const Value> inputs, Rng& rng) const = 0;

  // Log density of the observed subset of outputs (disengaged entries are
  // marginalized) given fully observed parent values.
  virtual double logpdf(std::span<const std::optional<Value>> outputs,
                        std::span<const Value> inputs) const = 0;

  // Maximum-likelihood style refit from complete (inputs, outputs) pairs.
  virtual void fit(const std::vector<std::pair<std::vector<Value>, std::vector<Value>>>&
                       training_pairs) = 0;

  virtual bool fitted() const = 0;

  virtual std::unique_ptr<ForeignPredictor> clone() const = 0;
  virtual nlohmann::json params_to_json() const = 0;
  virtual void params_from_json(const nlohmann::json& j) = 0;
};

struct ForeignSpec {
  std::string registry_key;  // resolved against the built-in registry
  std::vector<ColumnId> outputs;
  std::vector<ColumnId> inputs;
};

// Feedforward composition only: no foreign output may be an ancestor of its
// own inputs, and no column is produced by two predictors.
inline void check_acyclic(const std::vector<ForeignSpec>& specs) {
  std::map<ColumnId, std::size_t> producer;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (ColumnId c : specs[i].outputs) {
      if (producer.count(c))
        throw Error("column produced by two foreign predictors");
      producer[c] = i;
    }
  }
  // depth-first over predictor dependencies
  std::vector<int> mark(specs.size(), 0);  // 0 unvisited, 1 on stack, 2 done
  auto visit = [&](auto&& self, std::size_t i) -> void {
    if (mark[i] == 1) throw Error("foreign predictor composition has a cycle");
    if (mark[i] == 2) return;
    mark[i] = 1;
    for (ColumnId in : specs[i].inputs) {
      auto it = producer.find(in);
      if (it != producer.end()) self(self, it->second);
    }
    mark[i] = 2;
  };
  for (std::size_t i = 0; i < specs.size(); ++i) visit(visit, i);
  for (const auto& s : specs) {
    std::set<ColumnId> outs(s.outputs.begin(), s.outputs.end());
    for (ColumnId in : s.inputs)
      if (outs.count(in)) throw Error("foreign predictor reads its own output");
  }
}

// Topological order of predictor indexes (parents before children).
inline std::vector<std::size_t> topo_order(const std::vector<ForeignSpec>& specs) {
  check_acyclic(specs);
  std::map<ColumnId, std::size_t> producer;
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (ColumnId c : specs[i].outputs) producer[c] = i;
  std::vector<std::size_t> order;
  std::vector<int> mark(specs.size(), 0);
  auto visit = [&](auto&& self, std::size_t i) -> void {
    if (mark[i]) return;
    mark[i] = 1;
    for (ColumnId in : specs[i].inputs) {
      auto it = producer.find(in);
      if (it != producer.end()) self(self, it->second);
    }
    order.push_back(i);
  };
  for (std::size_t i = 0; i < specs.size(); ++i) visit(visit, i);
  return order;
}

}  // namespace bqldb::foreign
