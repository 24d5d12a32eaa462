#pragma once

// Plain-text serialization of group elements, Cayley tables, group
// descriptors and actions. Tokens are whitespace separated, one record per
// line, '#' starts a comment. The grammar is documented in README.md.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "symlat/error.hpp"
#include "symlat/group.hpp"

namespace symlat::io {

// ---------------------------------------------------------------------------
// Tokenized input
// ---------------------------------------------------------------------------

struct Line {
  std::size_t number = 0;
  std::vector<std::string> tokens;
};

class TextReader {
 public:
  explicit TextReader(std::istream& in) {
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
      ++number;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      std::istringstream words(raw);
      Line line{number, {}};
      for (std::string w; words >> w;) line.tokens.push_back(w);
      if (!line.tokens.empty()) lines_.push_back(std::move(line));
    }
    last_line_ = number;
  }

  bool done() const noexcept { return next_ >= lines_.size(); }
  const Line& peek() const {
    if (done()) throw ParseError(last_line_, "unexpected end of input");
    return lines_[next_];
  }
  const Line& take() {
    const Line& l = peek();
    ++next_;
    return l;
  }
  const Line& expect(const std::string& keyword, std::size_t min_tokens = 1) {
    const Line& l = take();
    if (l.tokens.front() != keyword) throw ParseError(l.number, "expected '" + keyword + "', found '" + l.tokens.front() + "'");
    if (l.tokens.size() < min_tokens) throw ParseError(l.number, "'" + keyword + "' record is too short");
    return l;
  }

 private:
  std::vector<Line> lines_;
  std::size_t next_ = 0;
  std::size_t last_line_ = 0;
};

inline double parse_double(const Line& line, std::size_t k) {
  if (k >= line.tokens.size()) throw ParseError(line.number, "missing numeric field");
  const std::string& s = line.tokens[k];
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(line.number, "not a number: '" + s + "'");
  return v;
}

inline std::size_t parse_index(const Line& line, std::size_t k) {
  if (k >= line.tokens.size()) throw ParseError(line.number, "missing integer field");
  const std::string& s = line.tokens[k];
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(line.number, "not an index: '" + s + "'");
  return v;
}

inline void check_token(const std::string& s) {
  if (s.empty()) throw ArgumentError("empty name cannot be serialized");
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '#')
      throw ArgumentError("name '" + s + "' contains whitespace or '#'");
}

/// Shortest decimal that round-trips exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

inline std::string element_text(const GroupElement& g) {
  std::ostringstream out;
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        auto matrix = [&](const Matrix3& m) {
          for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) out << ' ' << format_double(m(r, c));
        };
        if constexpr (std::is_same_v<T, FiniteElement>) {
          out << "finite " << e.index;
        } else if constexpr (std::is_same_v<T, PlanarMap>) {
          out << "planar " << format_double(e.angle) << ' ' << e.i << ' ' << e.j << ' ' << (e.reflect ? 1 : 0);
        } else if constexpr (std::is_same_v<T, AxisRotation>) {
          out << "axis " << format_double(e.axis[0]) << ' ' << format_double(e.axis[1]) << ' '
              << format_double(e.axis[2]) << ' ' << format_double(e.angle);
        } else if constexpr (std::is_same_v<T, RotationMatrix>) {
          out << "rotation";
          matrix(e.m);
        } else if constexpr (std::is_same_v<T, SpecialLinear>) {
          out << "special-linear";
          matrix(e.m);
        } else if constexpr (std::is_same_v<T, Translation>) {
          out << "translation " << e.shift.size();
          for (double v : e.shift) out << ' ' << format_double(v);
        } else {
          out << "permutation " << e.map.size();
          for (std::size_t v : e.map) out << ' ' << v;
        }
      },
      g);
  return out.str();
}

/// Parses an element starting at token `k`; finite elements refer to `table`.
inline GroupElement parse_element(const Line& line, std::size_t k, const FiniteGroupPtr& table) {
  if (k >= line.tokens.size()) throw ParseError(line.number, "missing element");
  const std::string& kind = line.tokens[k];
  auto need = [&](std::size_t count) {
    if (line.tokens.size() != k + 1 + count)
      throw ParseError(line.number, "element '" + kind + "' needs " + std::to_string(count) + " fields");
  };
  auto matrix = [&]() {
    need(9);
    Matrix3 m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = parse_double(line, k + 1 + 3 * r + c);
    return m;
  };
  try {
    if (kind == "finite") {
      need(1);
      if (!table) throw ParseError(line.number, "finite element outside a table context");
      return make_finite(table, parse_index(line, k + 1));
    }
    if (kind == "planar") {
      need(4);
      return make_planar(parse_double(line, k + 1), parse_index(line, k + 2), parse_index(line, k + 3),
                         parse_index(line, k + 4) != 0);
    }
    if (kind == "axis") {
      need(4);
      const Vector3 u(parse_double(line, k + 1), parse_double(line, k + 2), parse_double(line, k + 3));
      // already-unit axes are kept bit-for-bit so that documents round-trip
      if (std::abs(u.norm() - 1.0) <= kAxisTolerance) return AxisRotation{u, parse_double(line, k + 4)};
      return make_axis_rotation(u, parse_double(line, k + 4));
    }
    if (kind == "rotation") return make_rotation_matrix(matrix());
    if (kind == "special-linear") return make_special_linear(matrix());
    if (kind == "translation" || kind == "permutation") {
      const std::size_t d = parse_index(line, k + 1);
      if (line.tokens.size() != k + 2 + d) throw ParseError(line.number, kind + " length does not match its dimension");
      if (kind == "translation") {
        Vector v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = parse_double(line, k + 2 + i);
        return make_translation(std::move(v));
      }
      std::vector<std::size_t> p(d);
      for (std::size_t i = 0; i < d; ++i) p[i] = parse_index(line, k + 2 + i);
      return make_permutation(std::move(p));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line.number, e.what());
  }
  throw ParseError(line.number, "unknown element kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

inline void write_table(std::ostream& out, const std::string& name, const FiniteGroup& t) {
  check_token(name);
  out << "table " << name << ' ' << t.order() << '\n';
  out << "labels";
  for (const auto& l : t.labels()) {
    check_token(l);
    out << ' ' << l;
  }
  out << '\n';
  for (std::size_t r = 0; r < t.order(); ++r) {
    out << "row";
    for (std::size_t c = 0; c < t.order(); ++c) out << ' ' << t.product(r, c);
    out << '\n';
  }
  out << "end\n";
}

/// Reads a table block; returns (name, table).
inline std::pair<std::string, FiniteGroupPtr> read_table(TextReader& in) {
  const Line& head = in.expect("table", 3);
  const std::string name = head.tokens[1];
  const std::size_t n = parse_index(head, 2);
  const Line& labels = in.expect("labels");
  if (labels.tokens.size() != n + 1) throw ParseError(labels.number, "expected " + std::to_string(n) + " labels");
  std::vector<std::string> names(labels.tokens.begin() + 1, labels.tokens.end());
  std::vector<std::size_t> table;
  for (std::size_t r = 0; r < n; ++r) {
    const Line& row = in.expect("row");
    if (row.tokens.size() != n + 1) throw ParseError(row.number, "row must have " + std::to_string(n) + " entries");
    for (std::size_t c = 0; c < n; ++c) table.push_back(parse_index(row, c + 1));
  }
  in.expect("end");
  try {
    return {name, std::make_shared<const FiniteGroup>(std::move(names), std::move(table))};
  } catch (const Error& e) {
    throw ParseError(head.number, std::string("table '") + name + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Group descriptors
// ---------------------------------------------------------------------------

/// Registry mapping table pointers to names while writing, and names back to
/// tables while reading.
struct TableRegistry {
  std::map<std::string, FiniteGroupPtr> by_name;
  std::map<const FiniteGroup*, std::string> by_ptr;

  const std::string& name_of(const FiniteGroupPtr& t) const {
    auto it = by_ptr.find(t.get());
    if (it == by_ptr.end()) throw ArgumentError("table was not registered before use");
    return it->second;
  }
  void add(const std::string& name, FiniteGroupPtr t) {
    by_ptr.emplace(t.get(), name);
    by_name.emplace(name, std::move(t));
  }
};

inline void write_group(std::ostream& out, const std::string& ref, const GroupDescriptor& g, const TableRegistry& tables) {
  check_token(ref);
  out << "group " << ref;
  if (!g.label.empty()) {
    check_token(g.label);
    out << ' ' << g.label;
  }
  out << '\n';
  switch (g.kind) {
    case GroupKind::Finite:
      out << "kind finite " << tables.name_of(g.table) << '\n' << "members";
      for (std::size_t m : g.members) out << ' ' << m;
      out << '\n';
      break;
    case GroupKind::CircleAxis:
      out << "kind circle-axis\naxis " << format_double(g.axis[0]) << ' ' << format_double(g.axis[1]) << ' '
          << format_double(g.axis[2]) << '\n';
      break;
    case GroupKind::CirclePlane:
      out << "kind circle-plane\nplane " << g.plane_i << ' ' << g.plane_j << '\n';
      break;
    case GroupKind::SO3: out << "kind so3\n"; break;
    case GroupKind::SL3: out << "kind sl3\n"; break;
    case GroupKind::Translation: out << "kind translation\ndim " << g.dim << '\n'; break;
    case GroupKind::Permutation: out << "kind permutation\ndim " << g.dim << '\n'; break;
  }
  for (const auto& e : g.generators) out << "generator " << element_text(e) << '\n';
  out << "end\n";
}

/// Reads a group block; returns (ref, group).
inline std::pair<std::string, GroupDescriptor> read_group(TextReader& in, const TableRegistry& tables) {
  const Line& head = in.expect("group", 2);
  GroupDescriptor g;
  const std::string ref = head.tokens[1];
  g.label = head.tokens.size() > 2 ? head.tokens[2] : "";
  const Line& kind_line = in.expect("kind", 2);
  const std::string kind = kind_line.tokens[1];
  if (kind == "finite") {
    g.kind = GroupKind::Finite;
    if (kind_line.tokens.size() != 3) throw ParseError(kind_line.number, "finite groups name their table");
    auto it = tables.by_name.find(kind_line.tokens[2]);
    if (it == tables.by_name.end()) throw ParseError(kind_line.number, "unknown table '" + kind_line.tokens[2] + "'");
    g.table = it->second;
    const Line& m = in.expect("members", 2);
    for (std::size_t k = 1; k < m.tokens.size(); ++k) {
      std::size_t idx = parse_index(m, k);
      if (idx >= g.table->order()) throw ParseError(m.number, "member index out of range");
      g.members.push_back(idx);
    }
    std::sort(g.members.begin(), g.members.end());
    if (std::adjacent_find(g.members.begin(), g.members.end()) != g.members.end())
      throw ParseError(m.number, "repeated member index");
    if (!g.table->is_subgroup(g.members)) throw ParseError(m.number, "members do not form a subgroup");
  } else if (kind == "circle-axis") {
    g.kind = GroupKind::CircleAxis;
    const Line& a = in.expect("axis", 4);
    g.axis = Vector3(parse_double(a, 1), parse_double(a, 2), parse_double(a, 3));
    if (!(g.axis.norm() > 0)) throw ParseError(a.number, "axis must be nonzero");
    if (std::abs(g.axis.norm() - 1.0) > kAxisTolerance) g.axis.normalize();
  } else if (kind == "circle-plane") {
    g.kind = GroupKind::CirclePlane;
    const Line& p = in.expect("plane", 3);
    g.plane_i = parse_index(p, 1);
    g.plane_j = parse_index(p, 2);
    if (g.plane_i == g.plane_j) throw ParseError(p.number, "plane needs two distinct coordinates");
  } else if (kind == "so3") {
    g.kind = GroupKind::SO3;
  } else if (kind == "sl3") {
    g.kind = GroupKind::SL3;
  } else if (kind == "translation" || kind == "permutation") {
    g.kind = kind == "translation" ? GroupKind::Translation : GroupKind::Permutation;
    g.dim = parse_index(in.expect("dim", 2), 1);
  } else {
    throw ParseError(kind_line.number, "unknown group kind '" + kind + "'");
  }
  while (in.peek().tokens.front() == "generator") {
    const Line& l = in.take();
    GroupElement e = parse_element(l, 1, g.table);
    if (g.kind == GroupKind::Translation || g.kind == GroupKind::Permutation) {
      const bool ok = g.kind == GroupKind::Translation
                          ? std::holds_alternative<Translation>(e) && std::get<Translation>(e).shift.size() == g.dim
                          : std::holds_alternative<Permutation>(e) && std::get<Permutation>(e).map.size() == g.dim;
      if (!ok) throw ParseError(l.number, "generator does not match the group kind and dimension");
    } else if (!contains(g, e)) {
      throw ParseError(l.number, "generator is not an element of the group");
    }
    g.generators.push_back(std::move(e));
  }
  if (g.generators.empty()) throw ParseError(head.number, "group '" + ref + "' has no generators");
  in.expect("end");
  return {ref, std::move(g)};
}

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

inline ActionKind parse_action_kind(const Line& line, const std::string& s) {
  for (ActionKind k : {ActionKind::MatrixMultiply, ActionKind::PlanarRotation, ActionKind::CoordinatePermutation,
                       ActionKind::Translation, ActionKind::Trivial})
    if (s == to_string(k)) return k;
  throw ParseError(line.number, "unknown action kind '" + s + "'");
}

/// `action <kind> <dim> <group-ref>` followed by one `image` per table
/// element for table groups, then `end`.
inline void write_action(std::ostream& out, const GroupAction& a, const std::string& group_ref) {
  out << "action " << to_string(a.kind) << ' ' << a.dim << ' ' << group_ref << '\n';
  for (const auto& img : a.representation) out << "image " << element_text(img) << '\n';
  out << "end\n";
}

inline GroupAction read_action(TextReader& in, const std::map<std::string, GroupDescriptor>& groups) {
  const Line& head = in.expect("action", 4);
  const ActionKind kind = parse_action_kind(head, head.tokens[1]);
  const std::size_t dim = parse_index(head, 2);
  auto it = groups.find(head.tokens[3]);
  if (it == groups.end()) throw ParseError(head.number, "unknown group '" + head.tokens[3] + "'");
  std::vector<GroupElement> images;
  while (in.peek().tokens.front() == "image") {
    const Line& l = in.take();
    images.push_back(parse_element(l, 1, nullptr));
  }
  in.expect("end");
  if (images.empty()) return GroupAction{it->second, dim, kind, {}};
  try {
    GroupAction a = finite_action(it->second, dim, std::move(images));
    a.kind = kind;
    return a;
  } catch (const Error& e) {
    throw ParseError(head.number, e.what());
  }
}

// ---------------------------------------------------------------------------
// Standalone group documents
// ---------------------------------------------------------------------------

/// A self-contained group document: its table (for finite kinds) then the group.
inline std::string write_group_document(const GroupDescriptor& g) {
  std::ostringstream out;
  TableRegistry tables;
  if (g.table) {
    tables.add("T0", g.table);
    write_table(out, "T0", *g.table);
  }
  write_group(out, "G", g, tables);
  return out.str();
}

inline GroupDescriptor read_group_document(std::istream& in) {
  TextReader reader(in);
  TableRegistry tables;
  while (!reader.done() && reader.peek().tokens.front() == "table") {
    auto [name, t] = read_table(reader);
    tables.add(name, t);
  }
  auto [ref, g] = read_group(reader, tables);
  if (!reader.done()) throw ParseError(reader.peek().number, "trailing content after group");
  return g;
}

inline GroupDescriptor read_group_document(const std::string& text) {
  std::istringstream in(text);
  return read_group_document(in);
}

}  // namespace symlat::io
