#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "bqldb/foreign/predictor.hpp"
#include "bqldb/util/math.hpp"

namespace bqldb::foreign {

// Reference discriminative predictor with one output column.
//
//   - discrete output (categorical/binary): per-parent-configuration
//     empirical distribution with +1 smoothing; numeric parents are binned
//     into quartiles learned at fit time.
//   - numerical output: linear-Gaussian regression on numeric parents plus
//     one-hot offsets for discrete parents, sigma from residuals.
//
// Stands in for arbitrary external classifiers/regressors behind the same
// interface.
class ReferenceDiscriminative : public ForeignPredictor {
 public:
  ReferenceDiscriminative(StatType output_type, std::vector<StatType> input_types)
      : output_type_(std::move(output_type)), input_types_(std::move(input_types)) {
    if (output_type_.kind == StatKind::ignore)
      throw Error("discriminative predictor cannot model an ignored column");
    n_out_levels_ = discrete_levels(output_type_);
  }

  std::string kind() const override { return "reference-discriminative"; }
  std::size_t n_outputs() const override { return 1; }
  std::size_t n_inputs() const override { return input_types_.size(); }
  bool fitted() const override { return fitted_; }

  std::vector<Value> simulate(std::span<const Value> inputs, Rng& rng) const override {
    if (discrete_output()) {
      std::vector<double> w = level_probs(inputs);
      std::size_t j = rng.categorical(w);
      return {make_discrete(std::int64_t(j))};
    }
    auto [mean, sd] = gaussian_params(inputs);
    return {Value::real(rng.normal(mean, sd))};
  }

  double logpdf(std::span<const std::optional<Value>> outputs,
                std::span<const Value> inputs) const override {
    if (!outputs[0]) return 0.0;
    if (discrete_output()) {
      std::vector<double> w = level_probs(inputs);
      std::int64_t j = outputs[0]->as_int();
      if (j < 0 || std::size_t(j) >= w.size()) return kNegInf;
      return std::log(w[std::size_t(j)]);
    }
    auto [mean, sd] = gaussian_params(inputs);
    return log_normal_pdf(outputs[0]->as_double(), mean, sd);
  }

  void fit(const std::vector<std::pair<std::vector<Value>, std::vector<Value>>>&
               training_pairs) override {
    if (training_pairs.size() < 2)
      throw Error("discriminative predictor: need at least 2 complete training pairs");
    fit_bins(training_pairs);
    if (discrete_output()) {
      table_.clear();
      global_counts_.assign(n_out_levels_, 0.0);
      for (const auto& [in, out] : training_pairs) {
        std::size_t j = std::size_t(out[0].as_int());
        table_[config_key(in)].resize(n_out_levels_, 0.0);
        table_[config_key(in)][j] += 1.0;
        global_counts_[j] += 1.0;
      }
    } else {
      fit_linear(training_pairs);
    }
    fitted_ = true;
  }

  std::unique_ptr<ForeignPredictor> clone() const override {
    return std::make_unique<ReferenceDiscriminative>(*this);
  }

  nlohmann::json params_to_json() const override {
    nlohmann::json j;
    j["fitted"] = fitted_;
    j["bins"] = bins_;
    if (discrete_output()) {
      j["global_counts"] = global_counts_;
      nlohmann::json tbl = nlohmann::json::object();
      for (const auto& [k, v] : table_) tbl[k] = v;
      j["table"] = std::move(tbl);
    } else {
      j["coef"] = coef_;
      j["sigma"] = sigma_;
      j["offsets"] = nlohmann::json::object();
      for (const auto& [k, v] : offsets_) j["offsets"][k] = v;
    }
    return j;
  }

  void params_from_json(const nlohmann::json& j) override {
    fitted_ = j.at("fitted").get<bool>();
    bins_ = j.at("bins").get<std::vector<std::vector<double>>>();
    if (discrete_output()) {
      global_counts_ = j.at("global_counts").get<std::vector<double>>();
      table_.clear();
      for (auto it = j.at("table").begin(); it != j.at("table").end(); ++it)
        table_[it.key()] = it.value().get<std::vector<double>>();
    } else {
      coef_ = j.at("coef").get<std::vector<double>>();
      sigma_ = j.at("sigma").get<double>();
      offsets_.clear();
      for (auto it = j.at("offsets").begin(); it != j.at("offsets").end(); ++it)
        offsets_[it.key()] = it.value().get<double>();
    }
  }

 private:
  static std::size_t discrete_levels(const StatType& t) {
    if (t.kind == StatKind::categorical) return t.levels.size();
    if (t.kind == StatKind::binary) return 2;
    return 0;
  }

  bool discrete_output() const { return n_out_levels_ > 0; }

  Value make_discrete(std::int64_t j) const {
    return output_type_.kind == StatKind::binary ? Value::binary(j == 1)
                                                 : Value::categorical(j);
  }

  bool discrete_input(std::size_t i) const {
    return input_types_[i].kind == StatKind::categorical ||
           input_types_[i].kind == StatKind::binary;
  }

  void fit_bins(const std::vector<std::pair<std::vector<Value>, std::vector<Value>>>& ps) {
    bins_.assign(input_types_.size(), {});
    for (std::size_t i = 0; i < input_types_.size(); ++i) {
      if (discrete_input(i)) continue;
      std::vector<double> xs;
      for (const auto& [in, _] : ps) xs.push_back(in[i].as_double());
      for (double q : {0.25, 0.5, 0.75}) bins_[i].push_back(quantile(xs, q));
    }
  }

  std::string config_key(std::span<const Value> inputs) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (i) os << '|';
      if (discrete_input(i)) {
        os << inputs[i].as_int();
      } else {
        double x = inputs[i].as_double();
        std::size_t b = 0;
        if (i < bins_.size())
          while (b < bins_[i].size() && x > bins_[i][b]) ++b;
        os << 'b' << b;
      }
    }
    return os.str();
  }

  std::vector<double> level_probs(std::span<const Value> inputs) const {
    std::vector<double> counts(n_out_levels_, 0.0);
    if (fitted_) {
      auto it = table_.find(config_key(inputs));
      if (it != table_.end()) counts = it->second;
      else if (!global_counts_.empty()) counts = global_counts_;
    }
    double total = 0.0;
    for (double& c : counts) {
      c += 1.0;  // +1 smoothing
      total += c;
    }
    for (double& c : counts) c /= total;
    return counts;
  }

  // Design: intercept + numeric parents; discrete parents contribute a
  // fitted per-level offset.
  void fit_linear(const std::vector<std::pair<std::vector<Value>, std::vector<Value>>>& ps) {
    std::vector<std::size_t> numeric;
    for (std::size_t i = 0; i < input_types_.size(); ++i)
      if (!discrete_input(i)) numeric.push_back(i);
    std::size_t d = numeric.size() + 1;
    std::vector<std::vector<double>> xtx(d, std::vector<double>(d, 0.0));
    std::vector<double> xty(d, 0.0);
    for (const auto& [in, out] : ps) {
      std::vector<double> x(d, 1.0);
      for (std::size_t k = 0; k < numeric.size(); ++k) x[k + 1] = in[numeric[k]].as_double();
      double y = out[0].as_double();
      for (std::size_t a = 0; a < d; ++a) {
        xty[a] += x[a] * y;
        for (std::size_t b = 0; b < d; ++b) xtx[a][b] += x[a] * x[b];
      }
    }
    for (std::size_t a = 0; a < d; ++a) xtx[a][a] += 1e-8;  // ridge for rank safety
    coef_ = solve(xtx, xty);

    // per-config offsets over discrete parents, from residuals
    std::map<std::string, std::pair<double, double>> acc;  // key -> (sum, n)
    double ss = 0.0;
    for (const auto& [in, out] : ps) {
      double resid = out[0].as_double() - linear_mean(in);
      auto key = discrete_key(in);
      acc[key].first += resid;
      acc[key].second += 1.0;
    }
    offsets_.clear();
    for (const auto& [k, sn] : acc) offsets_[k] = sn.first / sn.second;
    for (const auto& [in, out] : ps) {
      double mu = linear_mean(in) + offset_for(in);
      double r = out[0].as_double() - mu;
      ss += r * r;
    }
    sigma_ = std::max(std::sqrt(ss / double(ps.size())), 1e-9);
  }

  static std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < n; ++r)
        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      std::swap(a[col], a[piv]);
      std::swap(b[col], b[piv]);
      double diag = a[col][col];
      if (std::abs(diag) < 1e-12) continue;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col) continue;
        double f = a[r][col] / diag;
        for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
        b[r] -= f * b[col];
      }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      x[i] = std::abs(a[i][i]) < 1e-12 ? 0.0 : b[i] / a[i][i];
    return x;
  }

  double linear_mean(std::span<const Value> inputs) const {
    std::vector<std::size_t> numeric;
    for (std::size_t i = 0; i < input_types_.size(); ++i)
      if (!discrete_input(i)) numeric.push_back(i);
    double mu = coef_.empty() ? 0.0 : coef_[0];
    for (std::size_t k = 0; k < numeric.size() && k + 1 < coef_.size(); ++k)
      mu += coef_[k + 1] * inputs[numeric[k]].as_double();
    return mu;
  }

  std::string discrete_key(std::span<const Value> inputs) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (discrete_input(i)) os << inputs[i].as_int() << '|';
    return os.str();
  }

  double offset_for(std::span<const Value> inputs) const {
    auto it = offsets_.find(discrete_key(inputs));
    return it == offsets_.end() ? 0.0 : it->second;
  }

  std::pair<double, double> gaussian_params(std::span<const Value> inputs) const {
    if (!fitted_) return {0.0, 100.0};
    return {linear_mean(inputs) + offset_for(inputs), sigma_};
  }

  StatType output_type_;
  std::vector<StatType> input_types_;
  std::size_t n_out_levels_ = 0;
  bool fitted_ = false;

  std::vector<std::vector<double>> bins_;  // per numeric input: quartile cutpoints
  std::map<std::string, std::vector<double>> table_;
  std::vector<double> global_counts_;

  std::vector<double> coef_;
  std::map<std::string, double> offsets_;
  double sigma_ = 100.0;
};

}  // namespace bqldb::foreign
