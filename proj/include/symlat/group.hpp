#pragma once

// Group elements, finite Cayley tables, group descriptors, actions on R^d
// and sampling distributions over groups.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "symlat/error.hpp"
#include "symlat/random.hpp"

namespace symlat {

inline constexpr double kMatrixTolerance = 1e-9;
inline constexpr double kAxisTolerance = 1e-12;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Vector = std::vector<double>;
using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

// ---------------------------------------------------------------------------
// Finite groups
// ---------------------------------------------------------------------------

/// A finite group stored as a labeled Cayley table. `product(a, b)` is the
/// index of ab, where (ab).x = a.(b.x) for any action.
class FiniteGroup {
 public:
  FiniteGroup(std::vector<std::string> labels, std::vector<std::size_t> table)
      : labels_(std::move(labels)), table_(std::move(table)) {
    const std::size_t n = labels_.size();
    if (n == 0) throw ArgumentError("finite group needs at least one element");
    if (table_.size() != n * n) throw ArgumentError("Cayley table must be n x n");
    for (std::size_t v : table_)
      if (v >= n) throw ArgumentError("Cayley table entry out of range");
    // Latin square: every row and column is a permutation.
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<bool> row_seen(n, false), col_seen(n, false);
      for (std::size_t c = 0; c < n; ++c) {
        if (row_seen[at(r, c)]) throw ArgumentError("Cayley table row is not a permutation");
        if (col_seen[at(c, r)]) throw ArgumentError("Cayley table column is not a permutation");
        row_seen[at(r, c)] = true;
        col_seen[at(c, r)] = true;
      }
    }
    identity_ = n;
    for (std::size_t e = 0; e < n && identity_ == n; ++e) {
      bool ok = true;
      for (std::size_t g = 0; g < n && ok; ++g) ok = at(e, g) == g && at(g, e) == g;
      if (ok) identity_ = e;
    }
    if (identity_ == n) throw ArgumentError("Cayley table has no identity");
    if (n <= 64) {
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t c = 0; c < n; ++c)
            if (at(at(a, b), c) != at(a, at(b, c)))
              throw ArgumentError("Cayley table is not associative");
    } else {
      Rng rng(0x5EED);
      for (int trial = 0; trial < 20000; ++trial) {
        std::size_t a = uniform_index(rng, n), b = uniform_index(rng, n), c = uniform_index(rng, n);
        if (at(at(a, b), c) != at(a, at(b, c))) throw ArgumentError("Cayley table is not associative");
      }
    }
    inverse_.resize(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (at(a, b) == identity_) inverse_[a] = b;
    std::set<std::string> unique(labels_.begin(), labels_.end());
    if (unique.size() != n) throw ArgumentError("element labels must be distinct");
  }

  std::size_t order() const noexcept { return labels_.size(); }
  std::size_t identity() const noexcept { return identity_; }
  std::size_t product(std::size_t a, std::size_t b) const { return at(a, b); }
  std::size_t inverse(std::size_t a) const { return inverse_.at(a); }
  const std::string& label(std::size_t a) const { return labels_.at(a); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::size_t>& table() const noexcept { return table_; }

  std::optional<std::size_t> index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
  }

  /// Sorted element indices of the subgroup generated by `gens`.
  std::vector<std::size_t> closure(std::span<const std::size_t> gens) const {
    std::vector<bool> in(order(), false);
    std::vector<std::size_t> members{identity_};
    in[identity_] = true;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t g : gens) {
        std::size_t p = at(members[i], g);
        if (!in[p]) {
          in[p] = true;
          members.push_back(p);
        }
      }
    }
    std::sort(members.begin(), members.end());
    return members;
  }

  /// True when the subset contains the identity and is closed under products.
  bool is_subgroup(std::span<const std::size_t> subset) const {
    std::vector<bool> in(order(), false);
    for (std::size_t s : subset) in.at(s) = true;
    if (!in[identity_]) return false;
    for (std::size_t a : subset)
      for (std::size_t b : subset)
        if (!in[at(a, b)]) return false;
    return true;
  }

  static std::shared_ptr<const FiniteGroup> trivial() {
    return std::make_shared<const FiniteGroup>(std::vector<std::string>{"e"}, std::vector<std::size_t>{0});
  }

  /// C_n with element k the rotation by k/n of a turn; labels "r^k".
  static std::shared_ptr<const FiniteGroup> cyclic(std::size_t n) {
    if (n == 0) throw ArgumentError("cyclic group order must be positive");
    std::vector<std::string> labels;
    std::vector<std::size_t> table(n * n);
    for (std::size_t k = 0; k < n; ++k) labels.push_back(k == 0 ? "e" : "r^" + std::to_string(k));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) table[a * n + b] = (a + b) % n;
    return std::make_shared<const FiniteGroup>(std::move(labels), std::move(table));
  }

  /// Symmetries of the square with the labeling I, R_h, R_v, R_/, R_\,
  /// R_pi/2, R_pi, R_3pi/2 (indices 0..7). Products are computed from the
  /// integer 2x2 matrices of each symmetry.
  static std::shared_ptr<const FiniteGroup> square_symmetries() {
    static const std::shared_ptr<const FiniteGroup> shared = build_square_symmetries();
    return shared;
  }

 private:
  static std::shared_ptr<const FiniteGroup> build_square_symmetries() {
    const auto& mats = square_symmetry_matrices();
    std::vector<std::size_t> table(64);
    for (std::size_t a = 0; a < 8; ++a) {
      for (std::size_t b = 0; b < 8; ++b) {
        const auto& A = mats[a];
        const auto& B = mats[b];
        std::array<int, 4> p{A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3],
                             A[2] * B[0] + A[3] * B[2], A[2] * B[1] + A[3] * B[3]};
        table[a * 8 + b] = static_cast<std::size_t>(std::find(mats.begin(), mats.end(), p) - mats.begin());
      }
    }
    return std::make_shared<const FiniteGroup>(
        std::vector<std::string>{"I", "R_h", "R_v", "R_/", "R_\\", "R_pi/2", "R_pi", "R_3pi/2"}, std::move(table));
  }

 public:
  /// Row-major 2x2 integer matrices for square_symmetries(), in index order.
  static const std::array<std::array<int, 4>, 8>& square_symmetry_matrices() {
    static const std::array<std::array<int, 4>, 8> mats{{
        {1, 0, 0, 1},    // I
        {1, 0, 0, -1},   // R_h: (x, y) -> (x, -y)
        {-1, 0, 0, 1},   // R_v: (x, y) -> (-x, y)
        {0, 1, 1, 0},    // R_/: (x, y) -> (y, x)
        {0, -1, -1, 0},  // R_\: (x, y) -> (-y, -x)
        {0, -1, 1, 0},   // R_pi/2
        {-1, 0, 0, -1},  // R_pi
        {0, 1, -1, 0},   // R_3pi/2
    }};
    return mats;
  }

  /// Dihedral group of order 2n: elements r^k (index k) and r^k s (index n + k).
  static std::shared_ptr<const FiniteGroup> dihedral(std::size_t n) {
    if (n < 1) throw ArgumentError("dihedral group needs n >= 1");
    const std::size_t order = 2 * n;
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < n; ++k) labels.push_back(k == 0 ? "e" : "r^" + std::to_string(k));
    for (std::size_t k = 0; k < n; ++k) labels.push_back(k == 0 ? "s" : "r^" + std::to_string(k) + "s");
    // r^a s^x * r^b s^y = r^(a + (-1)^x b) s^(x + y)
    std::vector<std::size_t> table(order * order);
    for (std::size_t i = 0; i < order; ++i) {
      for (std::size_t j = 0; j < order; ++j) {
        std::size_t a = i % n, x = i / n, b = j % n, y = j / n;
        std::size_t rot = x == 0 ? (a + b) % n : (a + n - b) % n;
        table[i * order + j] = ((x + y) % 2) * n + rot;
      }
    }
    return std::make_shared<const FiniteGroup>(std::move(labels), std::move(table));
  }

  static std::shared_ptr<const FiniteGroup> direct_product(const FiniteGroup& a, const FiniteGroup& b) {
    const std::size_t na = a.order(), nb = b.order(), n = na * nb;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t j = 0; j < nb; ++j) labels.push_back("(" + a.label(i) + "," + b.label(j) + ")");
    std::vector<std::size_t> table(n * n);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        table[x * n + y] = a.product(x / nb, y / nb) * nb + b.product(x % nb, y % nb);
    return std::make_shared<const FiniteGroup>(std::move(labels), std::move(table));
  }

  /// Closure of permutation generators, with (gh)[k] = h[g[k]] so that the
  /// coordinate action (g.x)_k = x_{g[k]} is a left action.
  static std::shared_ptr<const FiniteGroup> from_permutations(const std::vector<std::vector<std::size_t>>& gens) {
    if (gens.empty()) throw ArgumentError("need at least one generating permutation");
    const std::size_t d = gens.front().size();
    auto mul = [](const std::vector<std::size_t>& g, const std::vector<std::size_t>& h) {
      std::vector<std::size_t> out(g.size());
      for (std::size_t k = 0; k < g.size(); ++k) out[k] = h[g[k]];
      return out;
    };
    std::vector<std::size_t> id(d);
    for (std::size_t k = 0; k < d; ++k) id[k] = k;
    std::vector<std::vector<std::size_t>> elems{id};
    std::map<std::vector<std::size_t>, std::size_t> where{{id, 0}};
    for (std::size_t i = 0; i < elems.size(); ++i) {
      for (const auto& g : gens) {
        if (g.size() != d) throw ArgumentError("generating permutations differ in size");
        auto p = mul(elems[i], g);
        if (!where.count(p)) {
          where[p] = elems.size();
          elems.push_back(p);
        }
      }
    }
    const std::size_t n = elems.size();
    std::vector<std::string> labels;
    for (const auto& p : elems) {
      std::string s = "[";
      for (std::size_t k = 0; k < p.size(); ++k) s += (k ? "," : "") + std::to_string(p[k]);
      labels.push_back(s + "]");
    }
    std::vector<std::size_t> table(n * n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) table[a * n + b] = where.at(mul(elems[a], elems[b]));
    return std::make_shared<const FiniteGroup>(std::move(labels), std::move(table));
  }

 private:
  std::size_t at(std::size_t a, std::size_t b) const { return table_[a * labels_.size() + b]; }

  std::vector<std::string> labels_;
  std::vector<std::size_t> table_;
  std::vector<std::size_t> inverse_;
  std::size_t identity_ = 0;
};

using FiniteGroupPtr = std::shared_ptr<const FiniteGroup>;

// ---------------------------------------------------------------------------
// Group elements
// ---------------------------------------------------------------------------

struct FiniteElement {
  FiniteGroupPtr group;
  std::size_t index = 0;
};

/// Orthogonal map of the coordinate plane (i, j): x -> R_angle S^reflect x,
/// with S = diag(1, -1) on (x_i, x_j). Angle is kept in [0, 2pi).
struct PlanarMap {
  double angle = 0.0;
  std::size_t i = 0;
  std::size_t j = 1;
  bool reflect = false;
};

struct AxisRotation {
  Vector3 axis = Vector3::UnitZ();
  double angle = 0.0;
};

struct RotationMatrix {
  Matrix3 m = Matrix3::Identity();
};

struct SpecialLinear {
  Matrix3 m = Matrix3::Identity();
};

struct Translation {
  Vector shift;
};

/// Coordinate permutation acting as (g.x)_k = x_{map[k]}.
struct Permutation {
  std::vector<std::size_t> map;
};

using GroupElement =
    std::variant<FiniteElement, PlanarMap, AxisRotation, RotationMatrix, SpecialLinear, Translation, Permutation>;

inline double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

inline GroupElement make_finite(FiniteGroupPtr group, std::size_t index) {
  if (!group) throw ArgumentError("finite element needs a group");
  if (index >= group->order()) throw ArgumentError("finite element index out of range");
  return FiniteElement{std::move(group), index};
}

inline GroupElement make_planar(double angle, std::size_t i = 0, std::size_t j = 1, bool reflect = false) {
  if (i == j) throw ArgumentError("planar map needs two distinct coordinates");
  return PlanarMap{wrap_angle(angle), i, j, reflect};
}

inline GroupElement make_axis_rotation(const Vector3& axis, double angle) {
  const double norm = axis.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ArgumentError("rotation axis must be a nonzero finite vector");
  return AxisRotation{axis / norm, angle};
}

inline bool is_rotation_matrix(const Matrix3& m, double tol = kMatrixTolerance) {
  return (m.transpose() * m - Matrix3::Identity()).cwiseAbs().maxCoeff() <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

inline GroupElement make_rotation_matrix(const Matrix3& m) {
  if (!is_rotation_matrix(m)) throw ArgumentError("matrix is not a rotation (M^T M = I, det M = 1)");
  return RotationMatrix{m};
}

inline GroupElement make_special_linear(const Matrix3& m) {
  if (std::abs(m.determinant() - 1.0) > kMatrixTolerance) throw ArgumentError("special linear matrix needs det = 1");
  return SpecialLinear{m};
}

inline GroupElement make_translation(Vector shift) { return Translation{std::move(shift)}; }

inline GroupElement make_permutation(std::vector<std::size_t> map) {
  std::vector<bool> seen(map.size(), false);
  for (std::size_t v : map) {
    if (v >= map.size() || seen[v]) throw ArgumentError("permutation must be a bijection on {0..d-1}");
    seen[v] = true;
  }
  return Permutation{std::move(map)};
}

/// Rodrigues' formula.
inline Matrix3 rotation_about(const Vector3& unit_axis, double angle) {
  return Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
}

/// Nearest rotation by polar decomposition (U V^T of the SVD).
inline Matrix3 reorthonormalize(const Matrix3& m) {
  Eigen::JacobiSVD<Matrix3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Matrix3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

namespace detail {

inline std::optional<Matrix3> linear_3x3(const GroupElement& g) {
  if (auto* a = std::get_if<AxisRotation>(&g)) return rotation_about(a->axis, a->angle);
  if (auto* r = std::get_if<RotationMatrix>(&g)) return r->m;
  if (auto* s = std::get_if<SpecialLinear>(&g)) return s->m;
  return std::nullopt;
}

inline bool is_rotation_kind(const GroupElement& g) {
  return std::holds_alternative<AxisRotation>(g) || std::holds_alternative<RotationMatrix>(g);
}

inline const char* kind_name(const GroupElement& g) {
  static constexpr const char* names[] = {"finite", "planar", "axis-rotation", "rotation-matrix",
                                          "special-linear", "translation", "permutation"};
  return names[g.index()];
}

}  // namespace detail

/// Group product ab (apply b first, then a).
inline GroupElement compose(const GroupElement& a, const GroupElement& b) {
  auto mismatch = [&]() {
    return IncompatibleElements(std::string("cannot compose ") + detail::kind_name(a) + " with " + detail::kind_name(b));
  };
  if (auto* fa = std::get_if<FiniteElement>(&a)) {
    auto* fb = std::get_if<FiniteElement>(&b);
    if (!fb || fa->group != fb->group) throw mismatch();
    return FiniteElement{fa->group, fa->group->product(fa->index, fb->index)};
  }
  if (auto* pa = std::get_if<PlanarMap>(&a)) {
    auto* pb = std::get_if<PlanarMap>(&b);
    if (!pb || pa->i != pb->i || pa->j != pb->j) throw mismatch();
    // R_a S^x R_b S^y = R_{a + (-1)^x b} S^{x+y}
    const double angle = pa->reflect ? pa->angle - pb->angle : pa->angle + pb->angle;
    return PlanarMap{wrap_angle(angle), pa->i, pa->j, pa->reflect != pb->reflect};
  }
  if (auto* ta = std::get_if<Translation>(&a)) {
    auto* tb = std::get_if<Translation>(&b);
    if (!tb || ta->shift.size() != tb->shift.size()) throw mismatch();
    Vector s(ta->shift.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = ta->shift[k] + tb->shift[k];
    return Translation{std::move(s)};
  }
  if (auto* qa = std::get_if<Permutation>(&a)) {
    auto* qb = std::get_if<Permutation>(&b);
    if (!qb || qa->map.size() != qb->map.size()) throw mismatch();
    std::vector<std::size_t> out(qa->map.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = qb->map[qa->map[k]];
    return Permutation{std::move(out)};
  }
  auto ma = detail::linear_3x3(a);
  auto mb = detail::linear_3x3(b);
  if (!ma || !mb) throw mismatch();
  Matrix3 p = (*ma) * (*mb);
  if (detail::is_rotation_kind(a) && detail::is_rotation_kind(b)) {
    if (!is_rotation_matrix(p)) p = reorthonormalize(p);
    return RotationMatrix{p};
  }
  const double det = p.determinant();
  if (std::abs(det - 1.0) > kMatrixTolerance) p /= std::cbrt(det);
  return SpecialLinear{p};
}

inline GroupElement inverse(const GroupElement& g) {
  return std::visit(
      [](const auto& e) -> GroupElement {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, FiniteElement>) {
          return FiniteElement{e.group, e.group->inverse(e.index)};
        } else if constexpr (std::is_same_v<T, PlanarMap>) {
          // reflections are involutions; rotations invert by negating the angle
          return PlanarMap{e.reflect ? e.angle : wrap_angle(-e.angle), e.i, e.j, e.reflect};
        } else if constexpr (std::is_same_v<T, AxisRotation>) {
          return AxisRotation{e.axis, -e.angle};
        } else if constexpr (std::is_same_v<T, RotationMatrix>) {
          return RotationMatrix{e.m.transpose()};
        } else if constexpr (std::is_same_v<T, SpecialLinear>) {
          return SpecialLinear{e.m.inverse()};
        } else if constexpr (std::is_same_v<T, Translation>) {
          Vector s(e.shift.size());
          for (std::size_t k = 0; k < s.size(); ++k) s[k] = -e.shift[k];
          return Translation{std::move(s)};
        } else {
          std::vector<std::size_t> inv(e.map.size());
          for (std::size_t k = 0; k < inv.size(); ++k) inv[e.map[k]] = k;
          return Permutation{std::move(inv)};
        }
      },
      g);
}

/// Identity of the same kind (and table / dimension) as `g`.
inline GroupElement identity_like(const GroupElement& g) {
  return std::visit(
      [](const auto& e) -> GroupElement {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, FiniteElement>) {
          return FiniteElement{e.group, e.group->identity()};
        } else if constexpr (std::is_same_v<T, PlanarMap>) {
          return PlanarMap{0.0, e.i, e.j, false};
        } else if constexpr (std::is_same_v<T, AxisRotation>) {
          return AxisRotation{e.axis, 0.0};
        } else if constexpr (std::is_same_v<T, RotationMatrix> || std::is_same_v<T, SpecialLinear>) {
          return T{Matrix3::Identity()};
        } else if constexpr (std::is_same_v<T, Translation>) {
          return Translation{Vector(e.shift.size(), 0.0)};
        } else {
          std::vector<std::size_t> id(e.map.size());
          for (std::size_t k = 0; k < id.size(); ++k) id[k] = k;
          return Permutation{std::move(id)};
        }
      },
      g);
}

/// Equality up to `tol` (matrices compared entrywise, planar angles on the circle).
inline bool approx_equal(const GroupElement& a, const GroupElement& b, double tol = kMatrixTolerance) {
  if (auto* fa = std::get_if<FiniteElement>(&a)) {
    auto* fb = std::get_if<FiniteElement>(&b);
    return fb && fa->group == fb->group && fa->index == fb->index;
  }
  if (auto* pa = std::get_if<PlanarMap>(&a)) {
    auto* pb = std::get_if<PlanarMap>(&b);
    if (!pb || pa->i != pb->i || pa->j != pb->j || pa->reflect != pb->reflect) return false;
    double diff = std::abs(pa->angle - pb->angle);
    return std::min(diff, kTwoPi - diff) <= tol;
  }
  if (auto* ta = std::get_if<Translation>(&a)) {
    auto* tb = std::get_if<Translation>(&b);
    if (!tb || ta->shift.size() != tb->shift.size()) return false;
    for (std::size_t k = 0; k < ta->shift.size(); ++k)
      if (std::abs(ta->shift[k] - tb->shift[k]) > tol) return false;
    return true;
  }
  if (auto* qa = std::get_if<Permutation>(&a)) {
    auto* qb = std::get_if<Permutation>(&b);
    return qb && qa->map == qb->map;
  }
  auto ma = detail::linear_3x3(a);
  auto mb = detail::linear_3x3(b);
  return ma && mb && ((*ma) - (*mb)).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_identity(const GroupElement& g, double tol = kMatrixTolerance) {
  return approx_equal(g, identity_like(g), tol);
}

/// Applies a concrete (non-table) element to x, writing into out.
/// Exact for permutations and translations.
inline void apply_concrete(const GroupElement& g, std::span<const double> x, std::span<double> out) {
  if (out.size() != x.size()) throw DimensionMismatch("output buffer size differs from input");
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, FiniteElement>) {
          throw IncompatibleElements("finite table elements act only through a GroupAction representation");
        } else if constexpr (std::is_same_v<T, PlanarMap>) {
          if (e.i >= x.size() || e.j >= x.size()) throw DimensionMismatch("planar map coordinates exceed dimension");
          std::copy(x.begin(), x.end(), out.begin());
          const double u = x[e.i];
          const double v = e.reflect ? -x[e.j] : x[e.j];
          double c = std::cos(e.angle), s = std::sin(e.angle);
          // quarter turns act exactly
          const double quarters = e.angle / (std::numbers::pi / 2);
          if (std::abs(quarters - std::round(quarters)) <= 1e-12) {
            static constexpr double kCos[] = {1, 0, -1, 0}, kSin[] = {0, 1, 0, -1};
            const auto q = static_cast<std::size_t>(((static_cast<long long>(std::round(quarters)) % 4) + 4) % 4);
            c = kCos[q];
            s = kSin[q];
          }
          out[e.i] = c * u - s * v;
          out[e.j] = s * u + c * v;
        } else if constexpr (std::is_same_v<T, Translation>) {
          if (e.shift.size() != x.size()) throw DimensionMismatch("translation dimension differs from x");
          for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] + e.shift[k];
        } else if constexpr (std::is_same_v<T, Permutation>) {
          if (e.map.size() != x.size()) throw DimensionMismatch("permutation size differs from x");
          for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[e.map[k]];
        } else {
          if (x.size() != 3) throw DimensionMismatch("3x3 linear elements act on R^3 only");
          Matrix3 m;
          if constexpr (std::is_same_v<T, AxisRotation>) {
            m = rotation_about(e.axis, e.angle);
          } else {
            m = e.m;
          }
          const Vector3 y = m * Vector3(x[0], x[1], x[2]);
          out[0] = y[0];
          out[1] = y[1];
          out[2] = y[2];
        }
      },
      g);
}

// ---------------------------------------------------------------------------
// Group descriptors
// ---------------------------------------------------------------------------

enum class GroupKind { Finite, CircleAxis, CirclePlane, SO3, SL3, Translation, Permutation };

inline const char* to_string(GroupKind k) {
  switch (k) {
    case GroupKind::Finite: return "finite";
    case GroupKind::CircleAxis: return "circle-axis";
    case GroupKind::CirclePlane: return "circle-plane";
    case GroupKind::SO3: return "so3";
    case GroupKind::SL3: return "sl3";
    case GroupKind::Translation: return "translation";
    case GroupKind::Permutation: return "permutation";
  }
  return "?";
}

/// A group given by its kind and (topological) generators. Finite kinds are
/// subgroups of an ambient Cayley table, recorded as sorted member indices.
struct GroupDescriptor {
  GroupKind kind = GroupKind::Finite;
  std::string label;
  std::vector<GroupElement> generators;
  FiniteGroupPtr table;                 // Finite
  std::vector<std::size_t> members;     // Finite: sorted indices into table
  Vector3 axis = Vector3::UnitZ();      // CircleAxis
  std::size_t plane_i = 0, plane_j = 1; // CirclePlane
  std::size_t dim = 0;                  // Translation / Permutation

  bool is_finite_table() const noexcept { return kind == GroupKind::Finite; }
  bool is_trivial() const noexcept { return kind == GroupKind::Finite && members.size() == 1; }
  /// Number of elements for finite kinds.
  std::optional<std::size_t> order() const;
};

namespace detail {
inline std::vector<GroupElement> permutation_closure(const std::vector<GroupElement>& gens) {
  std::vector<GroupElement> out{identity_like(gens.front())};
  std::set<std::vector<std::size_t>> seen{std::get<Permutation>(out.front()).map};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& g : gens) {
      GroupElement p = compose(out[i], g);
      if (seen.insert(std::get<Permutation>(p).map).second) out.push_back(std::move(p));
    }
  }
  return out;
}
}  // namespace detail

inline std::optional<std::size_t> GroupDescriptor::order() const {
  if (kind == GroupKind::Finite) return members.size();
  if (kind == GroupKind::Permutation) return detail::permutation_closure(generators).size();
  return std::nullopt;
}

/// Subgroup of `table` generated by the given element indices.
inline GroupDescriptor finite_subgroup(FiniteGroupPtr table, std::vector<std::size_t> generator_indices,
                                       std::string label) {
  if (!table) throw ArgumentError("finite subgroup needs a table");
  if (generator_indices.empty()) generator_indices.push_back(table->identity());
  GroupDescriptor g;
  g.kind = GroupKind::Finite;
  g.label = std::move(label);
  g.members = table->closure(generator_indices);
  for (std::size_t i : generator_indices) g.generators.push_back(make_finite(table, i));
  g.table = std::move(table);
  return g;
}

inline GroupDescriptor whole_group(FiniteGroupPtr table, std::string label) {
  std::vector<std::size_t> all(table->order());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  return finite_subgroup(std::move(table), std::move(all), std::move(label));
}

inline GroupDescriptor trivial_group(std::string label = "I") {
  return finite_subgroup(FiniteGroup::trivial(), {0}, std::move(label));
}

/// S^1 of rotations about `axis` in R^3; generated topologically by a rotation
/// through one radian (an irrational fraction of a turn).
inline GroupDescriptor circle_about_axis(const Vector3& axis, std::string label) {
  GroupDescriptor g;
  g.kind = GroupKind::CircleAxis;
  g.label = std::move(label);
  auto gen = make_axis_rotation(axis, 1.0);
  g.axis = std::get<AxisRotation>(gen).axis;
  g.generators.push_back(std::move(gen));
  return g;
}

inline GroupDescriptor circle_in_plane(std::size_t i, std::size_t j, std::string label) {
  GroupDescriptor g;
  g.kind = GroupKind::CirclePlane;
  g.label = std::move(label);
  g.plane_i = i;
  g.plane_j = j;
  g.generators.push_back(make_planar(1.0, i, j));
  return g;
}

inline GroupDescriptor so3_group(std::string label = "SO(3)") {
  GroupDescriptor g;
  g.kind = GroupKind::SO3;
  g.label = std::move(label);
  g.generators.push_back(make_axis_rotation(Vector3::UnitZ(), 1.0));
  g.generators.push_back(make_axis_rotation(Vector3::UnitX(), 1.0));
  return g;
}

inline GroupDescriptor sl3_group(std::string label = "SL(3)") {
  GroupDescriptor g = so3_group(std::move(label));
  g.kind = GroupKind::SL3;
  Matrix3 stretch = Matrix3::Identity();
  stretch(0, 0) = 2.0;
  stretch(1, 1) = 0.5;
  g.generators.push_back(SpecialLinear{stretch});
  return g;
}

inline GroupDescriptor translation_group(std::vector<Vector> generators, std::string label) {
  if (generators.empty()) throw ArgumentError("translation group needs generators");
  GroupDescriptor g;
  g.kind = GroupKind::Translation;
  g.label = std::move(label);
  g.dim = generators.front().size();
  for (auto& v : generators) {
    if (v.size() != g.dim) throw DimensionMismatch("translation generators differ in dimension");
    g.generators.push_back(make_translation(std::move(v)));
  }
  return g;
}

inline GroupDescriptor permutation_group(std::vector<std::vector<std::size_t>> generators, std::string label) {
  if (generators.empty()) throw ArgumentError("permutation group needs generators");
  GroupDescriptor g;
  g.kind = GroupKind::Permutation;
  g.label = std::move(label);
  g.dim = generators.front().size();
  for (auto& p : generators) {
    if (p.size() != g.dim) throw DimensionMismatch("permutation generators differ in size");
    g.generators.push_back(make_permutation(std::move(p)));
  }
  return g;
}

/// All elements of a finite group, each exactly once.
inline std::vector<GroupElement> elements_of(const GroupDescriptor& g) {
  if (g.kind == GroupKind::Finite) {
    std::vector<GroupElement> out;
    out.reserve(g.members.size());
    for (std::size_t i : g.members) out.push_back(FiniteElement{g.table, i});
    return out;
  }
  if (g.kind == GroupKind::Permutation) return detail::permutation_closure(g.generators);
  throw NotFinite(std::string("elements_of called on continuous group '") + g.label + "' (" + to_string(g.kind) + ")");
}

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

enum class ActionKind { MatrixMultiply, PlanarRotation, CoordinatePermutation, Translation, Trivial };

inline const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::MatrixMultiply: return "matrix-multiply";
    case ActionKind::PlanarRotation: return "planar";
    case ActionKind::CoordinatePermutation: return "permutation";
    case ActionKind::Translation: return "translation";
    case ActionKind::Trivial: return "trivial";
  }
  return "?";
}

/// An action of `group` on R^dim. For table groups, `representation[k]` is
/// the concrete map by which table element k acts.
struct GroupAction {
  GroupDescriptor group;
  std::size_t dim = 0;
  ActionKind kind = ActionKind::Trivial;
  std::vector<GroupElement> representation;
};

inline void act_into(const GroupAction& action, const GroupElement& g, std::span<const double> x, std::span<double> out) {
  if (x.size() != action.dim) throw DimensionMismatch("x has dimension " + std::to_string(x.size()) +
                                                      ", action expects " + std::to_string(action.dim));
  if (action.kind == ActionKind::Trivial) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  if (auto* f = std::get_if<FiniteElement>(&g)) {
    if (!action.group.table || f->group != action.group.table || action.representation.empty())
      throw IncompatibleElements("finite element does not belong to the action's table");
    apply_concrete(action.representation.at(f->index), x, out);
    return;
  }
  apply_concrete(g, x, out);
}

inline Vector act(const GroupAction& action, const GroupElement& g, std::span<const double> x) {
  Vector out(x.size());
  act_into(action, g, x, out);
  return out;
}

namespace detail {
inline std::vector<Vector> probe_vectors(std::size_t dim, std::size_t count = 3) {
  Rng rng(0xC0FFEE ^ dim);
  std::vector<Vector> probes(count, Vector(dim));
  for (auto& p : probes)
    for (auto& v : p) v = standard_normal(rng);
  return probes;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}
}  // namespace detail

/// Action of a Cayley-table group through concrete images of its elements.
/// Checks the homomorphism property exhaustively on probe vectors.
inline GroupAction finite_action(GroupDescriptor group, std::size_t dim, std::vector<GroupElement> images) {
  if (group.kind != GroupKind::Finite) throw ArgumentError("finite_action needs a table group");
  const auto& table = *group.table;
  if (images.size() != table.order()) throw ArgumentError("one image per table element is required");
  GroupAction action{std::move(group), dim, ActionKind::Trivial, std::move(images)};
  bool all_planar = true, all_perm = true;
  for (const auto& img : action.representation) {
    if (std::holds_alternative<FiniteElement>(img)) throw ArgumentError("images must be concrete maps");
    all_planar = all_planar && std::holds_alternative<PlanarMap>(img);
    all_perm = all_perm && std::holds_alternative<Permutation>(img);
  }
  action.kind = all_planar ? ActionKind::PlanarRotation
                           : all_perm ? ActionKind::CoordinatePermutation : ActionKind::MatrixMultiply;
  const auto probes = detail::probe_vectors(dim, 2);
  Vector hx(dim), ghx(dim), gh_x(dim);
  for (const auto& x : probes) {
    apply_concrete(action.representation[table.identity()], x, hx);
    if (detail::max_abs_diff(hx, x) > 1e-12) throw ArgumentError("identity element must act as the identity map");
    for (std::size_t g = 0; g < table.order(); ++g) {
      for (std::size_t h = 0; h < table.order(); ++h) {
        apply_concrete(action.representation[h], x, hx);
        apply_concrete(action.representation[g], hx, ghx);
        apply_concrete(action.representation[table.product(g, h)], x, gh_x);
        if (detail::max_abs_diff(ghx, gh_x) > 1e-9)
          throw ArgumentError("images are not compatible with the Cayley table: " + table.label(g) + " * " +
                              table.label(h));
      }
    }
  }
  return action;
}

inline GroupAction matrix_action(GroupDescriptor group) {
  return GroupAction{std::move(group), 3, ActionKind::MatrixMultiply, {}};
}

inline GroupAction trivial_action(GroupDescriptor group, std::size_t dim) {
  return GroupAction{std::move(group), dim, ActionKind::Trivial, {}};
}

/// Same group, acting through a different concrete representation.
inline GroupAction with_representation(const GroupAction& base, std::vector<GroupElement> images) {
  return finite_action(base.group, base.dim, std::move(images));
}

/// Membership of a sampled element in a group, up to `tol`. Concrete
/// elements are tested against finite groups through the action's images.
inline bool contains(const GroupDescriptor& group, const GroupElement& g, const GroupAction* action = nullptr,
                     double tol = kMatrixTolerance) {
  switch (group.kind) {
    case GroupKind::Finite: {
      if (auto* f = std::get_if<FiniteElement>(&g)) {
        if (f->group == group.table) return std::binary_search(group.members.begin(), group.members.end(), f->index);
        return group.is_trivial() && f->index == f->group->identity();
      }
      if (group.is_trivial()) return is_identity(g, tol);
      if (!action || action->representation.empty() || action->group.table != group.table) return false;
      for (std::size_t k : group.members)
        if (approx_equal(action->representation[k], g, tol)) return true;
      return false;
    }
    case GroupKind::CirclePlane: {
      auto* p = std::get_if<PlanarMap>(&g);
      return p && !p->reflect && p->i == group.plane_i && p->j == group.plane_j;
    }
    case GroupKind::CircleAxis: {
      if (auto* a = std::get_if<AxisRotation>(&g)) {
        const double c = std::abs(a->axis.dot(group.axis));
        return std::abs(c - 1.0) <= tol || std::abs(std::sin(a->angle / 2)) <= tol;
      }
      if (auto* r = std::get_if<RotationMatrix>(&g)) {
        // a rotation about u fixes u
        return (r->m * group.axis - group.axis).norm() <= std::sqrt(tol) * 10;
      }
      return false;
    }
    case GroupKind::SO3: {
      auto m = detail::linear_3x3(g);
      return m && is_rotation_matrix(*m, std::max(tol, 1e-9));
    }
    case GroupKind::SL3: {
      auto m = detail::linear_3x3(g);
      return m && std::abs(m->determinant() - 1.0) <= std::max(tol, 1e-9);
    }
    case GroupKind::Translation: {
      auto* t = std::get_if<Translation>(&g);
      if (!t || t->shift.size() != group.dim) return false;
      // member of the real span of the generators
      Eigen::MatrixXd basis(group.dim, group.generators.size());
      for (std::size_t c = 0; c < group.generators.size(); ++c) {
        const auto& v = std::get<Translation>(group.generators[c]).shift;
        for (std::size_t r = 0; r < group.dim; ++r) basis(r, c) = v[r];
      }
      Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(t->shift.data(), static_cast<Eigen::Index>(group.dim));
      Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(y);
      return (basis * coef - y).norm() <= std::max(tol, 1e-9) * (1.0 + y.norm());
    }
    case GroupKind::Permutation: {
      auto* p = std::get_if<Permutation>(&g);
      if (!p || p->map.size() != group.dim) return false;
      for (const auto& e : elements_of(group))
        if (std::get<Permutation>(e).map == p->map) return true;
      return false;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

struct SamplerSpec;

struct UniformElements {
  std::vector<GroupElement> elements;
};

/// Uniform angle on [0, 2pi) about an axis in R^3, or in a coordinate plane.
struct HaarCircle {
  std::optional<Vector3> axis;
  std::size_t plane_i = 0;
  std::size_t plane_j = 1;
};

/// Uniform rotation: a normalized standard normal 4-vector read as a unit quaternion.
struct HaarSO3 {};

/// Rotation about a fixed axis by theta ~ N(0, stddev^2).
struct GaussianAngle {
  Vector3 axis = Vector3::UnitZ();
  double stddev = 1.0;
};

struct PointMass {
  GroupElement element;
};

/// R1 diag(e^a, e^b, e^{-a-b}) R2 with R1, R2 Haar rotations and a, b ~ N(0, s^2).
struct RandomSL3 {
  double log_scale_stddev = 0.5;
};

/// Translation by a Gaussian combination sum_k z_k v_k, z_k ~ N(0, stddev^2).
struct GaussianSpan {
  std::vector<Vector> directions;
  double stddev = 1.0;
};

/// Picks a component uniformly, then samples from it.
struct Mixture {
  std::vector<SamplerSpec> components;
};

struct SamplerSpec {
  std::variant<UniformElements, HaarCircle, HaarSO3, GaussianAngle, PointMass, RandomSL3, GaussianSpan, Mixture> spec;
};

inline void validate(const SamplerSpec& s) {
  if (auto* u = std::get_if<UniformElements>(&s.spec); u && u->elements.empty())
    throw ArgumentError("uniform sampler needs a nonempty element list");
  if (auto* g = std::get_if<GaussianAngle>(&s.spec); g && !(g->stddev > 0.0))
    throw ArgumentError("gaussian-angle sampler needs stddev > 0");
  if (auto* r = std::get_if<RandomSL3>(&s.spec); r && !(r->log_scale_stddev > 0.0))
    throw ArgumentError("random SL(3) sampler needs a positive log-scale stddev");
  if (auto* t = std::get_if<GaussianSpan>(&s.spec)) {
    if (t->directions.empty() || !(t->stddev > 0.0)) throw ArgumentError("gaussian-span sampler needs directions and stddev > 0");
    for (const auto& v : t->directions)
      if (v.size() != t->directions.front().size()) throw DimensionMismatch("gaussian-span directions differ in length");
  }
  if (auto* m = std::get_if<Mixture>(&s.spec)) {
    if (m->components.empty()) throw ArgumentError("mixture sampler needs components");
    for (const auto& c : m->components) validate(c);
  }
}

inline Matrix3 haar_rotation(Rng& rng) {
  Eigen::Vector4d q;
  do {
    for (int k = 0; k < 4; ++k) q[k] = standard_normal(rng);
  } while (q.norm() < 1e-12);
  q.normalize();
  return Eigen::Quaterniond(q[0], q[1], q[2], q[3]).toRotationMatrix();
}

inline GroupElement sample(const SamplerSpec& s, Rng& rng) {
  return std::visit(
      [&](const auto& spec) -> GroupElement {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, UniformElements>) {
          if (spec.elements.empty()) throw ArgumentError("uniform sampler needs a nonempty element list");
          return spec.elements[uniform_index(rng, spec.elements.size())];
        } else if constexpr (std::is_same_v<T, HaarCircle>) {
          const double theta = uniform_real(rng, 0.0, kTwoPi);
          if (spec.axis) return make_axis_rotation(*spec.axis, theta);
          return make_planar(theta, spec.plane_i, spec.plane_j);
        } else if constexpr (std::is_same_v<T, HaarSO3>) {
          return RotationMatrix{haar_rotation(rng)};
        } else if constexpr (std::is_same_v<T, GaussianAngle>) {
          return make_axis_rotation(spec.axis, spec.stddev * standard_normal(rng));
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return spec.element;
        } else if constexpr (std::is_same_v<T, RandomSL3>) {
          const Matrix3 r1 = haar_rotation(rng);
          const Matrix3 r2 = haar_rotation(rng);
          const double a = spec.log_scale_stddev * standard_normal(rng);
          const double b = spec.log_scale_stddev * standard_normal(rng);
          Matrix3 d = Matrix3::Zero();
          d(0, 0) = std::exp(a);
          d(1, 1) = std::exp(b);
          d(2, 2) = std::exp(-a - b);
          return SpecialLinear{r1 * d * r2};
        } else if constexpr (std::is_same_v<T, GaussianSpan>) {
          if (spec.directions.empty()) throw ArgumentError("gaussian-span sampler needs directions");
          Vector shift(spec.directions.front().size(), 0.0);
          for (const auto& v : spec.directions) {
            const double z = spec.stddev * standard_normal(rng);
            for (std::size_t k = 0; k < shift.size(); ++k) shift[k] += z * v[k];
          }
          return Translation{std::move(shift)};
        } else {
          if (spec.components.empty()) throw ArgumentError("mixture sampler needs components");
          return sample(spec.components[uniform_index(rng, spec.components.size())], rng);
        }
      },
      s.spec);
}

inline SamplerSpec uniform_over(std::vector<GroupElement> elements) { return {UniformElements{std::move(elements)}}; }
inline SamplerSpec point_mass(GroupElement g) { return {PointMass{std::move(g)}}; }

}  // namespace symlat
