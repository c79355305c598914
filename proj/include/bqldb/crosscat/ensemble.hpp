#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <thread>

#include "bqldb/crosscat/gibbs.hpp"
#include "bqldb/crosscat/query.hpp"
#include "bqldb/crosscat/state.hpp"

namespace bqldb::crosscat {

struct EnsembleMember {
  double weight = 1.0;          // query weight (unit for posterior chains)
  double smc_log_weight = 0.0;  // accumulated incorporate weight, diagnostic
  State state;
};

// The weighted collection all BQL queries run against. Members are
// independent chains over the same data; weights default to 1.
struct Ensemble {
  std::uint64_t schema_fingerprint = 0;
  std::vector<EnsembleMember> members;
  bool stale = false;  // post-hoc constraint repair without re-analysis

  void check() const {
    if (members.empty()) throw Error("ensemble has no members");
    double total = 0.0;
    for (const auto& m : members) {
      if (m.weight < 0.0) throw Error("ensemble weights must be non-negative");
      total += m.weight;
    }
    if (!(total > 0.0)) throw Error("ensemble weights are all zero");
  }

  std::size_t choose(Rng& rng) const {
    check();
    std::vector<double> w;
    w.reserve(members.size());
    for (const auto& m : members) w.push_back(m.weight);
    return rng.categorical(w);
  }

  double average(const std::function<double(const State&)>& f) const {
    check();
    double total = 0.0, acc = 0.0;
    for (const auto& m : members) total += m.weight;
    for (const auto& m : members) acc += (m.weight / total) * f(m.state);
    return acc;
  }

  std::int64_t min_sweeps() const {
    std::int64_t s = members.empty() ? 0 : members[0].state.sweeps;
    for (const auto& m : members) s = std::min(s, m.state.sweeps);
    return s;
  }
};

inline std::vector<Value> row_values_from_store(const MeasurementStore& store,
                                                std::size_t n_cols, RowId r) {
  std::vector<Value> vals(n_cols, Value::missing());
  for (const auto& [c, v] : store.row(r))
    if (c < n_cols) vals[c] = v;
  return vals;
}

// k prior-sampled members; each then absorbs every stored row through one
// collapsed Gibbs step, accumulating its sequential marginal-likelihood
// weight. Query weights start at 1.
inline Ensemble initialize_ensemble(const PopulationSchema& schema,
                                    const MeasurementStore& store, std::size_t k,
                                    const std::vector<DependenceConstraint>& constraints,
                                    const std::vector<foreign::ForeignSpec>& fspecs,
                                    std::uint64_t seed, const InitOptions& opts = {}) {
  if (k == 0) throw Error("need at least one model");
  Ensemble ens;
  ens.schema_fingerprint = schema_hash(schema);
  ens.members.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    EnsembleMember m;
    m.state = State::initialize(schema, constraints, fspecs, mix_seed(seed, 0x11, i),
                                opts, &store);
    for (const auto& [r, _] : store.rows())
      m.smc_log_weight +=
          m.state.incorporate(r, row_values_from_store(store, schema.size(), r));
    ens.members.push_back(std::move(m));
  }
  return ens;
}

struct AnalyzeBudget {
  enum class Kind { sweeps, seconds };
  Kind kind = Kind::sweeps;
  double amount = 1;
};

struct AnalyzeOptions {
  AnalyzeBudget budget;
  std::optional<AnalyzeBudget> checkpoint_every;
  bool foreign_only = false;  // ANALYZE FOREIGN PREDICTORS
  std::size_t threads = 0;    // 0: hardware concurrency
  // called after each checkpoint barrier (and once at the end)
  std::function<void(const Ensemble&)> on_checkpoint;
};

namespace detail {

inline void run_member_sweeps(State& st, std::int64_t n, bool foreign_only) {
  for (std::int64_t i = 0; i < n; ++i) {
    if (foreign_only) {
      transition(st, TransitionKind::foreign_predictors);
      ++st.sweeps;
    } else {
      sweep(st);
    }
  }
}

template <typename Fn>
inline void parallel_over_members(Ensemble& ens, std::size_t threads, Fn fn) {
  std::size_t n = ens.members.size();
  std::size_t workers = std::min(threads == 0 ? std::thread::hardware_concurrency() : threads,
                                 std::max<std::size_t>(n, 1));
  workers = std::max<std::size_t>(workers, 1);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(ens.members[i]);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(ens.members[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace detail

// Approximately Bayesian updating of every member: independent chains of
// systematic scans, in parallel, no resampling. Wall-clock budgets are
// checked between sweeps so checkpoints always hold consistent states.
inline void analyze(Ensemble& ens, const AnalyzeOptions& opts) {
  ens.check();
  using clock = std::chrono::steady_clock;
  auto start = clock::now();

  if (opts.budget.kind == AnalyzeBudget::Kind::sweeps) {
    std::int64_t total = std::int64_t(opts.budget.amount);
    std::int64_t chunk = total;
    if (opts.checkpoint_every &&
        opts.checkpoint_every->kind == AnalyzeBudget::Kind::sweeps)
      chunk = std::max<std::int64_t>(1, std::int64_t(opts.checkpoint_every->amount));
    std::int64_t done = 0;
    while (done < total) {
      std::int64_t step = std::min(chunk, total - done);
      detail::parallel_over_members(ens, opts.threads, [&](EnsembleMember& m) {
        detail::run_member_sweeps(m.state, step, opts.foreign_only);
      });
      done += step;
      if (opts.on_checkpoint && opts.checkpoint_every) opts.on_checkpoint(ens);
    }
  } else {
    auto deadline = start + std::chrono::duration_cast<clock::duration>(
                                std::chrono::duration<double>(opts.budget.amount));
    double ck_seconds = opts.checkpoint_every &&
                                opts.checkpoint_every->kind == AnalyzeBudget::Kind::seconds
                            ? opts.checkpoint_every->amount
                            : 0.0;
    auto next_ck = ck_seconds > 0.0
                       ? start + std::chrono::duration_cast<clock::duration>(
                                     std::chrono::duration<double>(ck_seconds))
                       : deadline;
    for (;;) {
      auto stop_at = std::min(deadline, next_ck);
      detail::parallel_over_members(ens, opts.threads, [&](EnsembleMember& m) {
        while (clock::now() < stop_at)
          detail::run_member_sweeps(m.state, 1, opts.foreign_only);
      });
      if (opts.on_checkpoint && opts.checkpoint_every) opts.on_checkpoint(ens);
      if (clock::now() >= deadline) break;
      next_ck = next_ck + std::chrono::duration_cast<clock::duration>(
                              std::chrono::duration<double>(std::max(ck_seconds, 0.001)));
    }
  }
  for (auto& m : ens.members) m.state.rebuild_stats();
  if (!opts.foreign_only) ens.stale = false;
}

}  // namespace bqldb::crosscat
