#pragma once

// Plain-text lattice documents: tables, groups, the ambient action, the node
// list and the cover (Hasse) edges. Cover edges are read back as declared
// order relations, so writing a lattice that was read reproduces the text.

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "symlat/group_io.hpp"
#include "symlat/lattice.hpp"

namespace symlat::io {

inline constexpr const char* kLatticeMagic = "symlat-lattice";

inline void write_lattice(std::ostream& out, const Lattice& lat) {
  out << kLatticeMagic << " 1\n";
  if (!lat.options().require_trivial_bottom) out << "option any-bottom\n";
  TableRegistry tables;
  auto register_table = [&](const FiniteGroupPtr& t) {
    if (!t || tables.by_ptr.count(t.get())) return;
    const std::string name = "T" + std::to_string(tables.by_ptr.size());
    tables.add(name, t);
    write_table(out, name, *t);
  };
  register_table(lat.ambient().group.table);
  for (const auto& n : lat.nodes()) register_table(n.group.table);

  write_group(out, "ambient", lat.ambient().group, tables);
  write_action(out, lat.ambient(), "ambient");
  for (const auto& n : lat.nodes()) write_group(out, "node" + std::to_string(n.id), n.group, tables);
  for (const auto& n : lat.nodes()) {
    check_token(n.label);
    out << "node " << n.id << " node" << n.id << ' ' << n.label << '\n';
  }
  for (auto [lo, hi] : lat.covers()) out << "cover " << lo << ' ' << hi << '\n';
  for (const auto& f : lat.generation_facts()) {
    out << "generated " << f.node;
    for (NodeId p : f.parts) out << ' ' << p;
    out << '\n';
  }
}

inline std::string write_lattice(const Lattice& lat) {
  std::ostringstream out;
  write_lattice(out, lat);
  return out.str();
}

inline Lattice read_lattice(std::istream& in) {
  TextReader reader(in);
  const Line& head = reader.expect(kLatticeMagic, 2);
  if (head.tokens[1] != "1") throw ParseError(head.number, "unsupported lattice format version '" + head.tokens[1] + "'");
  LatticeOptions options;
  TableRegistry tables;
  std::map<std::string, GroupDescriptor> groups;
  std::optional<GroupAction> ambient;
  std::vector<SubgroupNode> nodes;
  std::vector<std::pair<NodeId, NodeId>> covers;
  std::vector<GenerationFact> facts;
  std::vector<std::size_t> cover_lines;

  while (!reader.done()) {
    const Line& l = reader.peek();
    const std::string& key = l.tokens.front();
    if (key == "option") {
      reader.take();
      if (l.tokens.size() != 2 || l.tokens[1] != "any-bottom") throw ParseError(l.number, "unknown option");
      options.require_trivial_bottom = false;
    } else if (key == "table") {
      auto [name, t] = read_table(reader);
      if (tables.by_name.count(name)) throw ParseError(l.number, "table '" + name + "' defined twice");
      tables.add(name, t);
    } else if (key == "group") {
      const std::size_t line_no = l.number;
      auto [ref, g] = read_group(reader, tables);
      if (!groups.emplace(ref, std::move(g)).second) throw ParseError(line_no, "group '" + ref + "' defined twice");
    } else if (key == "action") {
      if (ambient) throw ParseError(l.number, "only one action may be given");
      ambient = read_action(reader, groups);
    } else if (key == "node") {
      reader.take();
      if (l.tokens.size() != 4) throw ParseError(l.number, "node record is 'node <id> <group-ref> <label>'");
      auto it = groups.find(l.tokens[2]);
      if (it == groups.end()) throw ParseError(l.number, "unknown group '" + l.tokens[2] + "'");
      GroupDescriptor g = it->second;
      g.label = l.tokens[3];
      nodes.push_back(SubgroupNode{parse_index(l, 1), std::move(g), l.tokens[3], 0});
    } else if (key == "cover") {
      reader.take();
      if (l.tokens.size() != 3) throw ParseError(l.number, "cover record is 'cover <lower> <upper>'");
      covers.emplace_back(parse_index(l, 1), parse_index(l, 2));
      cover_lines.push_back(l.number);
    } else if (key == "generated") {
      reader.take();
      if (l.tokens.size() < 4) throw ParseError(l.number, "generated record needs a node and at least two parts");
      GenerationFact f{parse_index(l, 1), {}};
      for (std::size_t k = 2; k < l.tokens.size(); ++k) f.parts.push_back(parse_index(l, k));
      facts.push_back(std::move(f));
    } else {
      throw ParseError(l.number, "unknown record '" + key + "'");
    }
  }
  if (!ambient) throw ParseError(0, "lattice document has no action");
  if (nodes.empty()) throw ParseError(0, "lattice document has no nodes");

  std::map<NodeId, const SubgroupNode*> by_id;
  for (const auto& n : nodes) by_id[n.id] = &n;
  for (std::size_t k = 0; k < covers.size(); ++k) {
    auto lo = by_id.find(covers[k].first), hi = by_id.find(covers[k].second);
    if (lo == by_id.end() || hi == by_id.end()) throw ParseError(cover_lines[k], "cover refers to an unknown node");
    const auto& a = lo->second->group;
    const auto& b = hi->second->group;
    if (a.kind == GroupKind::Finite && b.kind == GroupKind::Finite && a.table == b.table && !a.is_trivial() &&
        !std::includes(b.members.begin(), b.members.end(), a.members.begin(), a.members.end()))
      throw ParseError(cover_lines[k], "cover between finite groups that are not nested");
  }
  try {
    Lattice lat(std::move(nodes), std::move(*ambient), covers, std::move(facts), options);
    auto sorted = covers;
    std::sort(sorted.begin(), sorted.end());
    if (!covers.empty() && sorted != lat.covers())
      throw ParseError(cover_lines.front(), "listed cover edges differ from the transitive reduction of the order");
    return lat;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
}

inline Lattice read_lattice(const std::string& text) {
  std::istringstream in(text);
  return read_lattice(in);
}

}  // namespace symlat::io
