#pragma once

// Quotient projections, local constant (Nadaraya-Watson) regression with a
// Gaussian product kernel, symmetrized estimators, feature averaging and
// prediction error.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "symlat/csv.hpp"
#include "symlat/dataset.hpp"
#include "symlat/error.hpp"
#include "symlat/group.hpp"
#include "symlat/lattice.hpp"
#include "symlat/search.hpp"

namespace symlat {

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

struct IdentityProjection {};

/// x -> |x|.
struct RadialProjection {};

/// x -> 1 if |x|_inf > tol, else 0.
struct NonzeroIndicator {
  double tol = 1e-12;
};

/// x -> (arccos <u, x/|x|>, |x|) on R^3 minus the origin.
struct AxisColatitude {
  Vector3 axis = Vector3::UnitZ();
};

/// x -> (hypot(x_i, x_j), remaining coordinates in order).
struct PlanarRadius {
  std::size_t i = 0;
  std::size_t j = 1;
};

/// Lexicographically smallest point of the orbit {g x}, coordinates compared
/// with tolerance `tol`.
struct OrbitCanonical {
  std::vector<GroupElement> maps;
  double tol = 1e-9;
};

/// Coordinates in an orthonormal basis of the complement of span(directions).
struct ComplementProjection {
  std::vector<Vector> basis;
};

using ProjectionMap = std::variant<IdentityProjection, RadialProjection, NonzeroIndicator, AxisColatitude,
                                   PlanarRadius, OrbitCanonical, ComplementProjection>;

inline const char* projection_name(const ProjectionMap& p) {
  switch (p.index()) {
    case 0: return "identity";
    case 1: return "radial";
    case 2: return "nonzero-indicator";
    case 3: return "axis-colatitude";
    case 4: return "planar-radius";
    case 5: return "orbit-canonical";
    default: return "complement";
  }
}

inline std::size_t output_dim(const ProjectionMap& p, std::size_t d) {
  switch (p.index()) {
    case 1:
    case 2: return 1;
    case 3: return 2;
    case 4: return d - 1;
    case 6: return std::get<ComplementProjection>(p).basis.size();
    default: return d;
  }
}

inline ComplementProjection complement_of(const std::vector<Vector>& directions, std::size_t d) {
  Eigen::MatrixXd a(d, directions.size());
  for (std::size_t c = 0; c < directions.size(); ++c)
    for (std::size_t r = 0; r < d; ++r) a(r, c) = directions[c].at(r);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU);
  Eigen::Index rank = 0;
  const auto& sv = svd.singularValues();
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv[k] > 1e-12 * std::max(1.0, sv[0])) ++rank;
  ComplementProjection out;
  for (Eigen::Index c = rank; c < static_cast<Eigen::Index>(d); ++c) {
    Vector v(d);
    for (std::size_t r = 0; r < d; ++r) v[r] = svd.matrixU()(static_cast<Eigen::Index>(r), c);
    out.basis.push_back(std::move(v));
  }
  return out;
}

/// Projection onto the quotient by `group` acting through `action`.
inline ProjectionMap projection_for(const GroupDescriptor& group, const GroupAction& action) {
  switch (group.kind) {
    case GroupKind::Finite: {
      if (group.is_trivial()) return IdentityProjection{};
      if (action.kind == ActionKind::Trivial) return IdentityProjection{};
      OrbitCanonical o;
      for (std::size_t k : group.members) o.maps.push_back(action.representation.at(k));
      return o;
    }
    case GroupKind::CircleAxis: return AxisColatitude{group.axis};
    case GroupKind::CirclePlane: return PlanarRadius{group.plane_i, group.plane_j};
    case GroupKind::SO3: return RadialProjection{};
    case GroupKind::SL3: return NonzeroIndicator{};
    case GroupKind::Translation: {
      std::vector<Vector> dirs;
      for (const auto& g : group.generators) dirs.push_back(std::get<Translation>(g).shift);
      return complement_of(dirs, group.dim);
    }
    case GroupKind::Permutation: {
      OrbitCanonical o;
      o.maps = elements_of(group);
      return o;
    }
  }
  return IdentityProjection{};
}

namespace detail {
inline bool lex_less(const Vector& a, const Vector& b, double tol) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] < b[k] - tol) return true;
    if (a[k] > b[k] + tol) return false;
  }
  return false;
}
}  // namespace detail

/// Projects one point. Under AxisColatitude the origin has no colatitude:
/// strict mode throws, otherwise it maps to (0, 0).
inline Vector project_point(const ProjectionMap& p, std::span<const double> x, bool strict = true) {
  return std::visit(
      [&](const auto& m) -> Vector {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IdentityProjection>) {
          return Vector(x.begin(), x.end());
        } else if constexpr (std::is_same_v<T, RadialProjection>) {
          double s = 0;
          for (double v : x) s += v * v;
          return {std::sqrt(s)};
        } else if constexpr (std::is_same_v<T, NonzeroIndicator>) {
          for (double v : x)
            if (std::abs(v) > m.tol) return {1.0};
          return {0.0};
        } else if constexpr (std::is_same_v<T, AxisColatitude>) {
          if (x.size() != 3) throw DimensionMismatch("axis colatitude needs points in R^3");
          const Vector3 v(x[0], x[1], x[2]);
          const double r = v.norm();
          if (r == 0.0) {
            if (strict) throw ArgumentError("axis colatitude is undefined at the origin");
            return {0.0, 0.0};
          }
          const double c = std::clamp(m.axis.dot(v) / r, -1.0, 1.0);
          return {std::acos(c), r};
        } else if constexpr (std::is_same_v<T, PlanarRadius>) {
          if (m.i >= x.size() || m.j >= x.size()) throw DimensionMismatch("planar radius coordinates exceed dimension");
          Vector out{std::hypot(x[m.i], x[m.j])};
          for (std::size_t k = 0; k < x.size(); ++k)
            if (k != m.i && k != m.j) out.push_back(x[k]);
          return out;
        } else if constexpr (std::is_same_v<T, OrbitCanonical>) {
          Vector best(x.begin(), x.end()), y(x.size());
          for (const auto& g : m.maps) {
            apply_concrete(g, x, y);
            if (detail::lex_less(y, best, m.tol)) best = y;
          }
          return best;
        } else {
          Vector out;
          for (const auto& b : m.basis) {
            double s = 0;
            for (std::size_t k = 0; k < x.size(); ++k) s += b[k] * x[k];
            out.push_back(s);
          }
          return out;
        }
      },
      p);
}

struct ProjectedData {
  RegressionDataset data;
  std::vector<std::size_t> dropped;  // rows with no image
  std::vector<std::string> warnings;
};

/// Responses are kept; rows the map cannot project are dropped with a warning.
inline ProjectedData project(const RegressionDataset& data, const ProjectionMap& p) {
  const std::size_t out_dim = output_dim(p, data.dim());
  if (out_dim == 0) throw DimensionMismatch("projection has no output coordinates");
  std::vector<double> x, y;
  ProjectedData out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      const Vector v = project_point(p, data.row(i));
      x.insert(x.end(), v.begin(), v.end());
      y.push_back(data.response(i));
    } catch (const ArgumentError& e) {
      out.dropped.push_back(i);
      out.warnings.push_back("row " + std::to_string(i) + " dropped: " + e.what());
    }
  }
  out.data = RegressionDataset(std::move(x), std::move(y), out_dim);
  return out;
}

// ---------------------------------------------------------------------------
// Local constant estimator
// ---------------------------------------------------------------------------

/// Gaussian product kernel. Weights are shifted by their largest exponent,
/// so when every weight would underflow the prediction becomes the response
/// of the nearest training point (average over exact ties).
class KernelRegressor {
 public:
  KernelRegressor(RegressionDataset train, std::vector<double> bandwidths)
      : train_(std::move(train)), h_(std::move(bandwidths)) {
    if (h_.size() != train_.dim()) throw DimensionMismatch("one bandwidth per feature dimension is required");
    for (double h : h_)
      if (!(h > 0.0) || std::isnan(h)) throw ArgumentError("bandwidths must be positive");
    inv_h2_.resize(h_.size());
    for (std::size_t k = 0; k < h_.size(); ++k) inv_h2_[k] = std::isinf(h_[k]) ? 0.0 : 1.0 / (h_[k] * h_[k]);
  }

  double predict(std::span<const double> x) const {
    if (x.size() != train_.dim()) throw DimensionMismatch("query dimension differs from the training data");
    const std::size_t n = train_.size();
    exponents_.resize(n);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = train_.row(i);
      double e = 0;
      for (std::size_t k = 0; k < r.size(); ++k) {
        const double d = x[k] - r[k];
        e += d * d * inv_h2_[k];
      }
      exponents_[i] = -0.5 * e;
      top = std::max(top, exponents_[i]);
    }
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::exp(exponents_[i] - top);
      num += w * train_.response(i);
      den += w;
    }
    return num / den;
  }

  const RegressionDataset& training() const noexcept { return train_; }
  const std::vector<double>& bandwidths() const noexcept { return h_; }

 private:
  RegressionDataset train_;
  std::vector<double> h_;
  std::vector<double> inv_h2_;
  mutable std::vector<double> exponents_;
};

/// Leave-one-out squared error of the estimator with bandwidths h.
inline double loocv_error(const RegressionDataset& data, const std::vector<double>& h) {
  const std::size_t n = data.size(), d = data.dim();
  std::vector<double> inv_h2(d);
  for (std::size_t k = 0; k < d; ++k) inv_h2[k] = 1.0 / (h[k] * h[k]);
  std::vector<double> e(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = data.row(i);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto xj = data.row(j);
      double s = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = xi[k] - xj[k];
        s += diff * diff * inv_h2[k];
      }
      e[j] = -0.5 * s;
      top = std::max(top, e[j]);
    }
    double num = 0, den = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = std::exp(e[j] - top);
      num += w * data.response(j);
      den += w;
    }
    const double r = data.response(i) - num / den;
    total += r * r;
  }
  return total / static_cast<double>(n);
}

inline std::vector<double> bandwidth_multipliers(std::size_t count = 20, double lo = 0.01, double hi = 10.0) {
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(count - 1)));
  return out;
}

/// Per-dimension sample standard deviation; 0 for constant columns.
inline std::vector<double> feature_scales(const RegressionDataset& data) {
  const std::size_t n = data.size(), d = data.dim();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) mean[k] += data.row(i)[k];
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const double t = data.row(i)[k] - mean[k];
      var[k] += t * t;
    }
  for (auto& v : var) v = std::sqrt(v / static_cast<double>(n - 1));
  return var;
}

/// LOOCV over h_k = c * sd_k with c on a 20-point log grid in [0.01, 10]:
/// first a common multiplier, then two coordinate sweeps. Constant columns
/// get bandwidth 1 (their kernel factor is identically 1). Ties keep the
/// smaller multiplier.
inline std::vector<double> select_bandwidth_loocv(const RegressionDataset& data) {
  const std::size_t d = data.dim();
  const auto sd = feature_scales(data);
  const auto grid = bandwidth_multipliers();
  std::vector<bool> active(d);
  bool any_active = false;
  for (std::size_t k = 0; k < d; ++k) {
    active[k] = sd[k] > 0.0;
    any_active = any_active || active[k];
  }
  std::vector<double> mult(d, 1.0);
  auto to_h = [&](const std::vector<double>& c) {
    std::vector<double> h(d);
    for (std::size_t k = 0; k < d; ++k) h[k] = active[k] ? c[k] * sd[k] : 1.0;
    return h;
  };
  if (!any_active) return to_h(mult);
  double best = std::numeric_limits<double>::infinity();
  for (double c : grid) {
    std::vector<double> trial(d, c);
    const double err = loocv_error(data, to_h(trial));
    if (err < best) {
      best = err;
      mult = trial;
    }
  }
  std::size_t n_active = 0;
  for (bool a : active) n_active += a;
  if (n_active < 2) return to_h(mult);
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (std::size_t k = 0; k < d; ++k) {
      if (!active[k]) continue;
      for (double c : grid) {
        auto trial = mult;
        trial[k] = c;
        const double err = loocv_error(data, to_h(trial));
        if (err < best) {
          best = err;
          mult = trial;
        }
      }
    }
  }
  return to_h(mult);
}

inline KernelRegressor fit_lce(const RegressionDataset& data, std::optional<std::vector<double>> bandwidths = {}) {
  if (bandwidths) return KernelRegressor(data, std::move(*bandwidths));
  return KernelRegressor(data, select_bandwidth_loocv(data));
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

using Predictor = std::function<double(std::span<const double>)>;

/// x -> LCE(pi(x)).
struct ProjectedRegressor {
  ProjectionMap projection = IdentityProjection{};
  KernelRegressor lce;
  std::optional<NodeId> node;
  std::string label = "I";

  double predict(std::span<const double> x) const {
    if (std::holds_alternative<IdentityProjection>(projection)) return lce.predict(x);
    return lce.predict(project_point(projection, x, false));
  }

  Predictor predictor() const {
    return [self = *this](std::span<const double> x) { return self.predict(x); };
  }
};

/// Estimator A: LCE on the raw features.
inline ProjectedRegressor plain_estimator(const RegressionDataset& data) {
  return ProjectedRegressor{IdentityProjection{}, fit_lce(data), std::nullopt, "I"};
}

inline ProjectedRegressor projected_estimator(const RegressionDataset& data, const ProjectionMap& p,
                                              std::optional<NodeId> node, std::string label) {
  auto projected = project(data, p);
  return ProjectedRegressor{p, fit_lce(projected.data), node, std::move(label)};
}

enum class SymmetrizedVariant { FullData, SplitData };

struct SymmetrizedFit {
  ProjectedRegressor regressor;
  SearchResult search;
  std::size_t search_size = 0;
  std::size_t fit_size = 0;
};

/// Full data (B): search and fit on all rows. Split data (C): search on rows
/// [0, n/2), fit on rows [n/2, n). The fit uses the projection of the
/// estimated node, taken from `projections` when given.
inline SymmetrizedFit symmetrized_estimator(const RegressionDataset& data, const Lattice& lat, const TestConfig& test,
                                            const SearchConfig& search, SymmetrizedVariant variant,
                                            const std::map<NodeId, ProjectionMap>& projections = {},
                                            const std::map<NodeId, SamplerSpec>& samplers = {}) {
  const std::size_t n = data.size();
  const bool split = variant == SymmetrizedVariant::SplitData;
  const std::size_t half = n / 2;
  if (split && (half < 2 || n - half < 2)) throw ArgumentError("split estimator needs at least four rows");
  const RegressionDataset search_data = split ? data.slice(0, half) : data;
  const RegressionDataset fit_data = split ? data.slice(half, n) : data;
  SearchResult result = run_search(lat, data_tester(search_data, lat, test, samplers), search);
  const NodeId g = result.estimate;
  auto it = projections.find(g);
  const ProjectionMap p = it != projections.end() ? it->second : projection_for(lat.node(g).group, lat.ambient());
  return SymmetrizedFit{projected_estimator(fit_data, p, g, lat.node(g).label), std::move(result), search_data.size(),
                        fit_data.size()};
}

/// x -> (1/|G|) sum_g f(g x) over the finite group of `action`.
inline Predictor feature_average(Predictor f, const GroupAction& action) {
  if (action.group.kind != GroupKind::Finite)
    throw NotFinite("feature averaging is only supported for finite groups");
  if (action.kind == ActionKind::Trivial) return f;
  std::vector<GroupElement> maps;
  for (std::size_t k : action.group.members) maps.push_back(action.representation.at(k));
  return [f = std::move(f), maps = std::move(maps)](std::span<const double> x) {
    Vector y(x.size());
    double s = 0;
    for (const auto& g : maps) {
      apply_concrete(g, x, y);
      s += f(y);
    }
    return s / static_cast<double>(maps.size());
  };
}

inline double mspe(const Predictor& f, const RegressionDataset& test) {
  double s = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double r = f(test.row(i)) - test.response(i);
    s += r * r;
  }
  return s / static_cast<double>(test.size());
}

inline double mspe(const ProjectedRegressor& f, const RegressionDataset& test) {
  double s = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double r = f.predict(test.row(i)) - test.response(i);
    s += r * r;
  }
  return s / static_cast<double>(test.size());
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline void write_model_summary_header(std::ostream& out) { out << "estimator,node,label,projection,bandwidths,train_size\n"; }

/// Bandwidths are ';'-separated.
inline void write_model_summary(std::ostream& out, const std::string& estimator, const ProjectedRegressor& r) {
  out << csv_field(estimator) << ',' << (r.node ? std::to_string(*r.node) : "") << ',' << csv_field(r.label) << ','
      << projection_name(r.projection) << ',';
  const auto& h = r.lce.bandwidths();
  for (std::size_t k = 0; k < h.size(); ++k) out << (k ? ";" : "") << format_number(h[k]);
  out << ',' << r.lce.training().size() << '\n';
}

/// Columns x0..x{d-1},prediction.
inline void write_predictions(std::ostream& out, const Predictor& f, const RegressionDataset& queries) {
  for (std::size_t k = 0; k < queries.dim(); ++k) out << 'x' << k << ',';
  out << "prediction\n";
  for (std::size_t i = 0; i < queries.size(); ++i) {
    for (double v : queries.row(i)) out << format_number(v) << ',';
    out << format_number(f(queries.row(i))) << '\n';
  }
}

}  // namespace symlat
