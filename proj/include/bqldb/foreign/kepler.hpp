#pragma once

#include <cmath>

#include "bqldb/foreign/predictor.hpp"
#include "bqldb/util/math.hpp"

namespace bqldb::foreign {

// Stochastic two-body orbit model relating orbital period and eccentricity
// to perigee and apogee altitudes:
//
//   base  = period^(2/3)
//   r_lo  = base * (1 - eccentricity) - r_geo
//   r_hi  = base * (1 + eccentricity) - r_geo
//   apogee  ~ Normal(r_lo, sigma^2)
//   perigee ~ Normal(r_hi, sigma^2)
//
// The formulas are transcribed exactly as specified, including the
// lo/hi-to-apogee/perigee pairing and the absorbed unit constants; r_geo is
// configurable and defaults to 6378 (km). sigma is the noise scale set by
// fitting against observed (period, eccentricity) -> (perigee, apogee) pairs.
class KeplerPredictor : public ForeignPredictor {
 public:
  explicit KeplerPredictor(double sigma = 100.0, double r_geo = 6378.0)
      : sigma_(sigma), r_geo_(r_geo) {
    if (!(sigma_ > 0.0)) throw Error("kepler: sigma must be positive");
  }

  std::string kind() const override { return "kepler"; }
  std::size_t n_outputs() const override { return 2; }  // perigee, apogee
  std::size_t n_inputs() const override { return 2; }   // period, eccentricity

  double sigma() const { return sigma_; }
  double r_geo() const { return r_geo_; }

  // (mean of perigee, mean of apogee)
  std::pair<double, double> means(double period, double eccentricity) const {
    if (!(period > 0.0)) throw Error("kepler: period must be positive");
    if (!(eccentricity >= 0.0) || eccentricity >= 1.0)
      throw Error("kepler: eccentricity must lie in [0, 1)");
    double base = std::pow(period, 2.0 / 3.0);
    double r_lo = base * (1.0 - eccentricity) - r_geo_;
    double r_hi = base * (1.0 + eccentricity) - r_geo_;
    return {r_hi, r_lo};
  }

  std::vector<Value> simulate(std::span<const Value> inputs, Rng& rng) const override {
    auto [perigee_mean, apogee_mean] = means(inputs[0].as_double(), inputs[1].as_double());
    return {Value::real(rng.normal(perigee_mean, sigma_)),
            Value::real(rng.normal(apogee_mean, sigma_))};
  }

  double logpdf(std::span<const std::optional<Value>> outputs,
                std::span<const Value> inputs) const override {
    auto [perigee_mean, apogee_mean] = means(inputs[0].as_double(), inputs[1].as_double());
    double lp = 0.0;
    if (outputs[0]) lp += log_normal_pdf(outputs[0]->as_double(), perigee_mean, sigma_);
    if (outputs[1]) lp += log_normal_pdf(outputs[1]->as_double(), apogee_mean, sigma_);
    return lp;
  }

  // sigma <- residual standard deviation over all observed outputs.
  void fit(const std::vector<std::pair<std::vector<Value>, std::vector<Value>>>&
               training_pairs) override {
    if (training_pairs.size() < 2)
      throw Error("kepler: need at least 2 complete training pairs");
    double ss = 0.0;
    double scale = 0.0;
    std::size_t n = 0;
    for (const auto& [in, out] : training_pairs) {
      auto [pm, am] = means(in[0].as_double(), in[1].as_double());
      double rp = out[0].as_double() - pm;
      double ra = out[1].as_double() - am;
      ss += rp * rp + ra * ra;
      n += 2;
      scale = std::max({scale, std::abs(out[0].as_double()), std::abs(out[1].as_double())});
    }
    double sd = std::sqrt(ss / double(n));
    double floor = std::max(scale, 1.0) * 1e-9;
    sigma_ = std::max(sd, floor);
    fitted_ = true;
  }

  bool fitted() const override { return fitted_; }

  std::unique_ptr<ForeignPredictor> clone() const override {
    return std::make_unique<KeplerPredictor>(*this);
  }

  nlohmann::json params_to_json() const override {
    return {{"sigma", sigma_}, {"r_geo", r_geo_}, {"fitted", fitted_}};
  }

  void params_from_json(const nlohmann::json& j) override {
    sigma_ = j.at("sigma").get<double>();
    r_geo_ = j.at("r_geo").get<double>();
    fitted_ = j.at("fitted").get<bool>();
  }

 private:
  double sigma_;
  double r_geo_;
  bool fitted_ = false;
};

}  // namespace bqldb::foreign
