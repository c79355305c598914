#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "bqldb/core/schema.hpp"
#include "bqldb/core/value.hpp"
#include "bqldb/util/rng.hpp"

namespace bqldb::gpm {

struct CellRef {
  RowId row;
  ColumnId col;
  bool operator==(const CellRef&) const = default;
};

struct CellAssignment {
  RowId row;
  ColumnId col;
  Value value;
};

// What a generative population model is responsible for: the columns it
// produces, the columns it may read, and opaque configuration.
struct GpmSchema {
  std::vector<std::pair<ColumnId, StatType>> outputs;
  std::vector<std::pair<ColumnId, StatType>> inputs;
  std::string body;

  void check() const {
    if (outputs.empty()) throw Error("gpm schema needs at least one output column");
    for (const auto& [oc, _] : outputs)
      for (const auto& [ic, __] : inputs)
        if (oc == ic) throw Error("gpm schema: outputs and inputs must be disjoint");
  }

  const StatType* output_type(ColumnId c) const {
    for (const auto& [id, t] : outputs)
      if (id == c) return &t;
    return nullptr;
  }
};

// Conditioning on an event of zero density is an explicit error, never an
// empty result.
class ConditioningError : public Error {
 public:
  explicit ConditioningError(const std::string& what) : Error(what) {}
};

struct KlEstimate;

// A generative population model over an infinite-row table of typed cells.
// Cells are identified by (row, column); distinct cells are conditionally
// independent given the model's latent state, so logpdf is additive over
// conditionally independent cells and simulate/logpdf agree.
class Gpm {
 public:
  virtual ~Gpm() = default;

  virtual const GpmSchema& schema() const = 0;

  // n joint draws of `targets` given `givens`, each sample aligned with the
  // target order.
  virtual std::vector<std::vector<Value>> simulate(
      std::span<const CellAssignment> givens, std::span<const CellRef> targets,
      std::size_t n, Rng& rng) const = 0;

  // Log density (mass for discrete cells) of `query` given `givens`.
  virtual double logpdf(std::span<const CellAssignment> givens,
                        std::span<const CellAssignment> query, Rng& rng) const = 0;

  // Divergence of measurement set A from measurement set B under this model,
  // conditioned on `conditions`. Implementations may override with something
  // sharper; the default is the Monte Carlo estimator below.
  virtual KlEstimate kl_divergence(std::span<const CellRef> set_a,
                                   std::span<const CellRef> set_b,
                                   std::span<const CellAssignment> conditions,
                                   std::size_t n, Rng& rng) const;
};

struct KlEstimate {
  double value = 0.0;    // mean of log p_A(x) - log p_B(x), x ~ A
  double std_err = 0.0;  // standard error of the mean
  std::size_t n = 0;
  bool divergent = false;  // some sample had zero density under B

  double lower3() const { return value - 3.0 * std_err; }
  double upper3() const { return value + 3.0 * std_err; }
};

// Monte Carlo divergence of measurement set A from measurement set B under
// one model: sample A, average the log-density ratio of A to B at the
// sampled points. Non-negative in expectation; zero-density samples under B
// are reported as a flagged +inf estimate rather than silently dropped.
inline KlEstimate kl_divergence_mc(const Gpm& g, std::span<const CellRef> set_a,
                                   std::span<const CellRef> set_b,
                                   std::span<const CellAssignment> conditions,
                                   std::size_t n, Rng& rng) {
  if (set_a.size() != set_b.size())
    throw Error("kl_divergence_mc: measurement sets must have equal size");
  if (n < 2) throw Error("kl_divergence_mc: need n >= 2 samples");
  for (std::size_t i = 0; i < set_a.size(); ++i) {
    const StatType* ta = g.schema().output_type(set_a[i].col);
    const StatType* tb = g.schema().output_type(set_b[i].col);
    if (!ta || !tb) throw Error("kl_divergence_mc: unknown column");
    if (ta->kind != tb->kind)
      throw Error("kl_divergence_mc: paired columns must share a statistical type");
  }

  auto samples = g.simulate(conditions, set_a, n, rng);
  double sum = 0.0, sumsq = 0.0;
  bool divergent = false;
  std::vector<CellAssignment> qa(set_a.size()), qb(set_b.size());
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < set_a.size(); ++i) {
      qa[i] = {set_a[i].row, set_a[i].col, s[i]};
      qb[i] = {set_b[i].row, set_b[i].col, s[i]};
    }
    double la = g.logpdf(conditions, qa, rng);
    double lb = g.logpdf(conditions, qb, rng);
    if (lb == kNegInf) {
      divergent = true;
      continue;
    }
    double term = la - lb;
    sum += term;
    sumsq += term * term;
  }
  KlEstimate est;
  est.n = n;
  est.divergent = divergent;
  if (divergent) {
    est.value = kPosInf;
    return est;
  }
  est.value = sum / double(n);
  double var = std::max(0.0, sumsq / double(n) - est.value * est.value);
  est.std_err = std::sqrt(var / double(n));
  return est;
}

inline KlEstimate Gpm::kl_divergence(std::span<const CellRef> set_a,
                                     std::span<const CellRef> set_b,
                                     std::span<const CellAssignment> conditions,
                                     std::size_t n, Rng& rng) const {
  return kl_divergence_mc(*this, set_a, set_b, conditions, n, rng);
}

}  // namespace bqldb::gpm
