#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "bqldb/core/value.hpp"
#include "bqldb/util/math.hpp"
#include "bqldb/util/rng.hpp"

namespace bqldb::foreign {

// Sampling-importance-resampling adapter: turns a forward-only stochastic
// simulator with an evaluable output density into a conditionable model.
// Particles are drawn from the input prior, weighted by the likelihood of
// the observed outputs, and resampled; the marginal density of the
// observation is estimated by the mean particle weight.
template <typename Input>
struct SirResult {
  std::vector<Input> particles;  // resampled (equally weighted)
  double log_marginal = kNegInf;
  bool degenerate = false;  // every particle had zero likelihood
};

template <typename Input>
SirResult<Input> sir_condition(std::size_t n_particles,
                               const std::function<Input(Rng&)>& input_prior,
                               const std::function<double(const Input&)>& log_likelihood,
                               Rng& rng) {
  if (n_particles < 100)
    throw Error("sir_condition: need at least 100 particles");
  std::vector<Input> draws;
  std::vector<double> logw;
  draws.reserve(n_particles);
  logw.reserve(n_particles);
  for (std::size_t i = 0; i < n_particles; ++i) {
    draws.push_back(input_prior(rng));
    logw.push_back(log_likelihood(draws.back()));
  }
  SirResult<Input> out;
  double lse = logsumexp(logw);
  if (lse == kNegInf) {
    out.degenerate = true;
    return out;
  }
  out.log_marginal = lse - std::log(double(n_particles));
  out.particles.reserve(n_particles);
  for (std::size_t i = 0; i < n_particles; ++i)
    out.particles.push_back(draws[rng.categorical_log(logw)]);
  return out;
}

class DegenerateConditioning : public Error {
 public:
  explicit DegenerateConditioning(const std::string& what) : Error(what) {}
};

}  // namespace bqldb::foreign
