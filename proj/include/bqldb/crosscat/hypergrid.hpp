#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "bqldb/crosscat/component.hpp"
#include "bqldb/util/math.hpp"

namespace bqldb::crosscat {

constexpr std::size_t kGridPoints = 30;

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

// Per-column grid of candidate hyperparameter values, derived from the
// column's data. Hyperparameter transitions Gibbs-sample each axis from its
// grid under a uniform prior over grid points.
struct HyperGrid {
  std::vector<GridAxis> axes;

  double log_prior_mass() const {
    double lp = 0.0;
    for (const auto& a : axes) lp -= std::log(double(a.values.size()));
    return lp;
  }

  void check() const {
    for (const auto& a : axes) {
      if (a.values.size() < 10)
        throw Error("hyper grid axis '" + a.name + "' has fewer than 10 points");
      for (double v : a.values)
        if (!std::isfinite(v)) throw Error("hyper grid axis '" + a.name + "' not finite");
    }
  }
};

inline double get_axis(const Hypers& h, std::size_t axis) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BetaBernoulliHypers>) {
          return axis == 0 ? v.alpha : v.beta;
        } else if constexpr (std::is_same_v<T, CategoricalHypers>) {
          return v.alpha;
        } else if constexpr (std::is_same_v<T, NormalGammaHypers>) {
          switch (axis) {
            case 0: return v.mean;
            case 1: return v.kappa;
            case 2: return v.shape;
            default: return v.rate;
          }
        } else {
          return axis == 0 ? v.shape : v.rate;
        }
      },
      h);
}

inline void set_axis(Hypers& h, std::size_t axis, double value) {
  std::visit(
      [&](auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BetaBernoulliHypers>) {
          (axis == 0 ? v.alpha : v.beta) = value;
        } else if constexpr (std::is_same_v<T, CategoricalHypers>) {
          v.alpha = value;
        } else if constexpr (std::is_same_v<T, NormalGammaHypers>) {
          switch (axis) {
            case 0: v.mean = value; break;
            case 1: v.kappa = value; break;
            case 2: v.shape = value; break;
            default: v.rate = value; break;
          }
        } else {
          (axis == 0 ? v.shape : v.rate) = value;
        }
      },
      h);
}

// `data` holds the column's observed values in modeling space. Grids must
// stay finite and cover the data range; degenerate columns get widened axes
// (variance floored at 1e-6 * scale^2, or 1.0 when the scale is undefined).
inline HyperGrid build_grid(const StatType& type, const std::vector<double>& data) {
  HyperGrid g;
  // Pseudo-count style axes are capped well below the data size: a prior
  // strong enough to pin component parameters makes the row partition
  // irrelevant to the marginal likelihood, and structure stops being
  // identifiable.
  double strength_hi = 15.0;
  switch (type.kind) {
    case StatKind::binary: {
      g.axes.push_back({"alpha", log_spaced(0.05, strength_hi, kGridPoints)});
      g.axes.push_back({"beta", log_spaced(0.05, strength_hi, kGridPoints)});
      break;
    }
    case StatKind::categorical: {
      g.axes.push_back({"alpha", log_spaced(0.02, strength_hi, kGridPoints)});
      break;
    }
    case StatKind::numerical: {
      auto mv = mean_var(data);
      double scale = 0.0;
      for (double x : data) scale = std::max(scale, std::abs(x));
      double var_floor = scale > 0.0 ? 1e-6 * scale * scale : 1.0;
      double var = std::max(mv.var, var_floor);
      double lo = data.empty() ? -3.0 : *std::min_element(data.begin(), data.end());
      double hi = data.empty() ? 3.0 : *std::max_element(data.begin(), data.end());
      if (!(hi > lo)) {
        double pad = std::max(1.0, std::abs(lo));
        lo -= pad;
        hi += pad;
      }
      std::vector<double> means;
      if (data.size() >= kGridPoints) {
        for (std::size_t i = 0; i < kGridPoints; ++i)
          means.push_back(quantile(data, double(i) / double(kGridPoints - 1)));
        // de-duplicate while keeping coverage of the range
        std::sort(means.begin(), means.end());
        means.erase(std::unique(means.begin(), means.end()), means.end());
      }
      if (means.size() < 10) means = lin_spaced(lo, hi, kGridPoints);
      g.axes.push_back({"mean", means});
      g.axes.push_back({"kappa", log_spaced(1e-2, 2.0, kGridPoints)});
      g.axes.push_back({"shape", log_spaced(0.5, 30.0, kGridPoints)});
      g.axes.push_back({"rate", log_spaced(var * 1e-2, var * 1e2, kGridPoints)});
      break;
    }
    case StatKind::count: {
      double mean = data.empty() ? 1.0 : std::max(mean_var(data).mean, 0.1);
      g.axes.push_back({"shape", log_spaced(0.1, std::max(10.0, mean * 20.0), kGridPoints)});
      g.axes.push_back({"rate", log_spaced(0.1, 20.0, kGridPoints)});
      break;
    }
    case StatKind::ignore:
      throw Error("ignored columns have no hyper grid");
  }
  g.check();
  return g;
}

inline Hypers initial_hypers(const StatType& type, const HyperGrid& grid, Rng& rng) {
  Hypers h;
  switch (type.kind) {
    case StatKind::binary: h = BetaBernoulliHypers{}; break;
    case StatKind::categorical:
      h = CategoricalHypers{1.0, std::uint32_t(type.levels.size())};
      break;
    case StatKind::numerical: h = NormalGammaHypers{}; break;
    case StatKind::count: h = PoissonGammaHypers{}; break;
    case StatKind::ignore: throw Error("ignored columns have no hyperparameters");
  }
  for (std::size_t a = 0; a < grid.axes.size(); ++a) {
    std::size_t i = std::size_t(rng.uniform_index(grid.axes[a].values.size()));
    set_axis(h, a, grid.axes[a].values[i]);
  }
  check_hypers(h);
  return h;
}

inline nlohmann::json grid_to_json(const HyperGrid& g) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : g.axes)
    axes.push_back({{"name", a.name}, {"values", a.values}});
  return axes;
}

inline HyperGrid grid_from_json(const nlohmann::json& j) {
  HyperGrid g;
  for (const auto& a : j)
    g.axes.push_back({a.at("name").get<std::string>(),
                      a.at("values").get<std::vector<double>>()});
  return g;
}

}  // namespace bqldb::crosscat
