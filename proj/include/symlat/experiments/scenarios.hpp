#pragma once

// Synthetic data generators: the exp(-|x1|) family on R^d and the four
// extrapolation scenarios on R^3.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "symlat/dataset.hpp"
#include "symlat/error.hpp"
#include "symlat/random.hpp"

namespace symlat::experiments {

using Target = std::function<double(std::span<const double>)>;

/// Y = f(X) + N(0, sigma^2), X ~ N(0, diag(train_sd^2)) for training data
/// and N(0, diag(test_sd^2)) for test data.
struct Scenario {
  std::string id;
  Target f;
  std::vector<double> train_sd;
  std::vector<double> test_sd;
  double sigma = 0.0;

  std::size_t dim() const noexcept { return train_sd.size(); }
};

inline double exp_abs_first(std::span<const double> x) { return std::exp(-std::abs(x[0])); }

inline double sin_neg_norm(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sin(-std::sqrt(s));
}

/// f_d(x) = exp(-|x1|), X ~ N(0, 4 I_d).
inline Scenario finite_scenario(std::size_t d, double sigma = 0.05) {
  if (d < 2) throw DimensionMismatch("scenario exp-abs needs d >= 2");
  return Scenario{"exp-abs", exp_abs_first, std::vector<double>(d, 2.0), std::vector<double>(d, 2.0), sigma};
}

/// Scenarios 1-4 on R^3 with noise sd 0.01. Scenario 1 samples both sets
/// from N(0, 2 I); scenarios 2-4 train on N(0, diag(0.1, 0.1, 2)).
inline Scenario extrapolation_scenario(int k) {
  const double wide = std::sqrt(2.0), narrow = std::sqrt(0.1);
  const std::vector<double> iso(3, wide), flat{narrow, narrow, wide};
  switch (k) {
    case 1: return Scenario{"extrapolation-1", sin_neg_norm, iso, iso, 0.01};
    case 2: return Scenario{"extrapolation-2", sin_neg_norm, flat, iso, 0.01};
    case 3:
      return Scenario{"extrapolation-3", [](std::span<const double> x) { return std::sin(-std::abs(x[2])); }, flat, iso,
                      0.01};
    case 4:
      return Scenario{"extrapolation-4", [](std::span<const double> x) { return std::sin(-std::abs(x[0])); }, flat, iso,
                      0.01};
    default: throw ArgumentError("scenario number must be 1, 2, 3 or 4");
  }
}

/// "exp-abs" (with dimension d) or "extrapolation-k".
inline Scenario scenario_by_id(const std::string& id, std::size_t d = 2, double sigma = 0.05) {
  if (id == "exp-abs") return finite_scenario(d, sigma);
  const std::string prefix = "extrapolation-";
  if (id.size() == prefix.size() + 1 && id.rfind(prefix, 0) == 0 && id.back() >= '1' && id.back() <= '4')
    return extrapolation_scenario(id.back() - '0');
  throw ArgumentError("unknown scenario '" + id + "'");
}

/// Features are drawn row by row, then the noise for that row.
inline RegressionDataset generate(const Scenario& s, std::size_t n, Rng& rng, bool test_law = false) {
  const auto& sd = test_law ? s.test_sd : s.train_sd;
  const std::size_t d = sd.size();
  std::vector<double> x(n * d), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) x[i * d + k] = sd[k] * standard_normal(rng);
    y[i] = s.f(std::span<const double>(x.data() + i * d, d)) + s.sigma * standard_normal(rng);
  }
  return RegressionDataset(std::move(x), std::move(y), d);
}

}  // namespace symlat::experiments
