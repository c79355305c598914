#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "bqldb/gpm/interface.hpp"

namespace bqldb::gpm {

// Weighted collection of models sharing one schema; the object every query
// runs against. Unit weights on posterior samples give Monte Carlo Bayesian
// model averaging.
struct WeightedEnsemble {
  struct Member {
    double weight = 1.0;
    std::shared_ptr<const Gpm> model;
  };

  std::vector<Member> members;

  void check() const {
    if (members.empty()) throw Error("ensemble needs at least one member");
    double total = 0.0;
    for (const auto& m : members) {
      if (m.weight < 0.0) throw Error("ensemble weights must be non-negative");
      if (!m.model) throw Error("ensemble member without a model");
      total += m.weight;
    }
    if (!(total > 0.0)) throw Error("ensemble weights must not all be zero");
    // members must agree on what they model
    const auto& first = members[0].model->schema().outputs;
    for (const auto& m : members) {
      const auto& outs = m.model->schema().outputs;
      if (outs.size() != first.size())
        throw Error("ensemble members disagree on their schema");
      for (std::size_t i = 0; i < outs.size(); ++i)
        if (outs[i].first != first[i].first || outs[i].second.kind != first[i].second.kind)
          throw Error("ensemble members disagree on their schema");
    }
  }

  double total_weight() const {
    double t = 0.0;
    for (const auto& m : members) t += m.weight;
    return t;
  }
};

// Member index drawn with probability weight_i / sum(weights).
inline std::size_t ensemble_choose(const WeightedEnsemble& ens, Rng& rng) {
  ens.check();
  std::vector<double> w;
  w.reserve(ens.members.size());
  for (const auto& m : ens.members) w.push_back(m.weight);
  return rng.categorical(w);
}

// Normalized weighted average of a per-model functional.
inline double ensemble_average(const WeightedEnsemble& ens,
                               const std::function<double(const Gpm&)>& f) {
  ens.check();
  double total = ens.total_weight();
  double acc = 0.0;
  for (const auto& m : ens.members) acc += (m.weight / total) * f(*m.model);
  return acc;
}

}  // namespace bqldb::gpm
