#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "gttf/graph.hpp"

namespace gttf {

struct LoadOptions {
  bool map_ids = false;          // accept arbitrary string ids, remap densely
  bool allow_self_loops = false; // otherwise src == dst is a parse error
  bool directed = false;
};

struct LoadedGraph {
  EdgeList edges;
  std::vector<std::string> id_table;  // dense id -> original token (map_ids)
};

// One edge per line: src <TAB> dst [<TAB> weight]; '#' lines and blank
// lines skipped. Without map_ids, tokens must be non-negative integers and
// n = max id + 1. With map_ids, ids are assigned in first-seen order.
inline LoadedGraph load_edge_list(const std::string& path,
                                  const LoadOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  LoadedGraph out;
  out.edges.directed = opt.directed;
  std::unordered_map<std::string, NodeId> remap;
  std::uint64_t max_id = 0;
  bool any = false;
  std::string line;
  std::uint64_t lineno = 0;
  auto resolve = [&](const std::string& tok) -> NodeId {
    if (opt.map_ids) {
      auto [it, inserted] = remap.emplace(tok, out.id_table.size());
      if (inserted) out.id_table.push_back(tok);
      return it->second;
    }
    std::uint64_t v = 0;
    for (char c : tok) {
      if (c < '0' || c > '9')
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": non-integer id '" + tok +
                                 "' (use id mapping for string ids)");
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (tok.empty()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty id");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, w;
    if (!(ls >> a >> b))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'src dst [weight]'");
    Edge e;
    e.src = resolve(a);
    e.dst = resolve(b);
    if (ls >> w) {
      try {
        e.weight = std::stod(w);
      } catch (...) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad weight '" + w + "'");
      }
      if (e.weight <= 0)
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-positive weight");
    }
    if (e.src == e.dst && !opt.allow_self_loops)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": self-loop (not enabled)");
    max_id = std::max({max_id, e.src, e.dst});
    any = true;
    out.edges.edges.push_back(e);
  }
  if (!any) throw std::runtime_error("edge list has no edges: " + path);
  out.edges.n = opt.map_ids ? out.id_table.size() : max_id + 1;
  return out;
}

inline void save_edge_list(const std::string& path, const EdgeList& list) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list: " + path);
  for (const Edge& e : list.edges) out << e.src << '\t' << e.dst << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Original-token table persisted alongside a remapped edge list.
inline void save_id_table(const std::string& path,
                          const std::vector<std::string>& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write id table: " + path);
  for (std::size_t i = 0; i < table.size(); ++i) out << i << '\t' << table[i] << '\n';
}

namespace detail {
constexpr char kSnapshotMagic[5] = {'G', 'T', 'T', 'F', '1'};
inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}
inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("snapshot truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
}  // namespace detail

// Binary snapshot: magic, n, m, degrees, neighbor pool (8-byte LE words).
inline void save_snapshot(const std::string& path, const CompactAdj& adj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot: " + path);
  out.write(detail::kSnapshotMagic, 5);
  detail::put_u64(out, adj.n);
  detail::put_u64(out, adj.m);
  for (std::uint64_t d : adj.degrees) detail::put_u64(out, d);
  for (NodeId v : adj.pool) detail::put_u64(out, v);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline CompactAdj load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path);
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, detail::kSnapshotMagic, 5) != 0)
    throw std::runtime_error("bad snapshot magic: " + path);
  CompactAdj adj;
  adj.n = detail::get_u64(in);
  adj.m = detail::get_u64(in);
  adj.degrees.resize(adj.n);
  for (auto& d : adj.degrees) d = detail::get_u64(in);
  adj.offsets.assign(adj.n + 1, 0);
  for (NodeId u = 0; u < adj.n; ++u) adj.offsets[u + 1] = adj.offsets[u] + adj.degrees[u];
  if (adj.offsets[adj.n] != adj.m) throw std::runtime_error("snapshot degree sum != m");
  adj.pool.resize(adj.m);
  for (auto& v : adj.pool) {
    v = detail::get_u64(in);
    if (v >= adj.n) throw std::runtime_error("snapshot neighbor id out of range");
  }
  return adj;
}

}  // namespace gttf
