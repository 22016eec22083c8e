#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace gttf {

using NodeId = std::uint64_t;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  double weight = 1.0;
};

// Raw edge set as ingested; ids dense in [0, n).
struct EdgeList {
  std::uint64_t n = 0;
  bool directed = false;
  std::vector<Edge> edges;
};

// Degree vector plus left-aligned neighbor rows packed into one pool.
// O(n + m) storage, O(1) row lookup, rows sorted ascending.
struct CompactAdj {
  std::uint64_t n = 0;
  std::uint64_t m = 0;  // sum of degrees after orphan self-loop insertion
  std::vector<std::uint64_t> degrees;
  std::vector<std::uint64_t> offsets;  // n + 1 prefix sums over the pool
  std::vector<NodeId> pool;
  std::uint64_t duplicates_dropped = 0;

  std::uint64_t degree(NodeId u) const { return degrees[u]; }
  std::span<const NodeId> row(NodeId u) const {
    return {pool.data() + offsets[u], degrees[u]};
  }
  bool valid(NodeId u) const { return u < n; }
};

// Exactly the stored neighbors of u (copying accessor; row() is zero-copy).
inline std::vector<NodeId> neighbors(const CompactAdj& adj, NodeId u) {
  if (!adj.valid(u)) throw std::invalid_argument("neighbors: node id out of range");
  auto r = adj.row(u);
  return {r.begin(), r.end()};
}

// Build the packed representation. symmetrize inserts both directions of
// every edge; orphan nodes receive a self-loop; duplicate directed pairs are
// dropped and counted.
inline CompactAdj build_compact_adj(const EdgeList& list, bool symmetrize) {
  if (list.n == 0) throw std::invalid_argument("build_compact_adj: empty node set");
  const std::uint64_t n = list.n;
  std::vector<std::pair<NodeId, NodeId>> dir;
  dir.reserve(list.edges.size() * (symmetrize ? 2 : 1));
  for (const Edge& e : list.edges) {
    if (e.src >= n || e.dst >= n)
      throw std::invalid_argument("build_compact_adj: node id >= declared n");
    dir.emplace_back(e.src, e.dst);
    if (symmetrize && e.src != e.dst) dir.emplace_back(e.dst, e.src);
  }
  std::sort(dir.begin(), dir.end());
  std::uint64_t dup = 0;
  if (!dir.empty()) {
    auto last = std::unique(dir.begin(), dir.end());
    dup = static_cast<std::uint64_t>(dir.end() - last);
    dir.erase(last, dir.end());
  }

  CompactAdj adj;
  adj.n = n;
  adj.duplicates_dropped = dup;
  adj.degrees.assign(n, 0);
  for (const auto& [s, d] : dir) adj.degrees[s]++;
  // Orphans get a self-loop so every row supports sampling.
  std::vector<NodeId> loops;
  for (NodeId u = 0; u < n; ++u)
    if (adj.degrees[u] == 0) {
      adj.degrees[u] = 1;
      loops.push_back(u);
    }
  adj.offsets.assign(n + 1, 0);
  for (NodeId u = 0; u < n; ++u) adj.offsets[u + 1] = adj.offsets[u] + adj.degrees[u];
  adj.m = adj.offsets[n];
  adj.pool.assign(adj.m, 0);
  std::vector<std::uint64_t> fill(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const auto& [s, d] : dir) adj.pool[fill[s]++] = d;
  for (NodeId u : loops) adj.pool[fill[u]++] = u;
  // dir was sorted, so each row is already ascending; self-loop rows are
  // single-entry. Keep the sort explicit anyway for future builders.
  for (NodeId u = 0; u < n; ++u) {
    auto b = adj.pool.begin() + static_cast<std::ptrdiff_t>(adj.offsets[u]);
    std::sort(b, b + static_cast<std::ptrdiff_t>(adj.degrees[u]));
  }
  return adj;
}

// Bytes held by the packed representation (vector sizes, not capacities).
// Linear in n and m by construction; the storage audit fits the
// coefficients empirically.
inline std::uint64_t counted_bytes(const CompactAdj& adj) {
  return static_cast<std::uint64_t>(sizeof(CompactAdj)) +
         8ULL * (adj.degrees.size() + adj.offsets.size() + adj.pool.size());
}

inline bool is_connected(const CompactAdj& adj) {
  if (adj.n == 0) return true;
  std::vector<char> seen(adj.n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::uint64_t cnt = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : adj.row(u))
      if (!seen[v]) {
        seen[v] = 1;
        ++cnt;
        stack.push_back(v);
      }
  }
  return cnt == adj.n;
}

// Degrees of the max(A, A^T) + I augmentation of the full graph
// (self-loop counted once even if already stored).
inline std::vector<double> augmented_degrees(const CompactAdj& adj) {
  // Symmetrize by unioning row u with the set {w : u in row(w)}.
  std::vector<std::vector<NodeId>> incoming(adj.n);
  for (NodeId u = 0; u < adj.n; ++u)
    for (NodeId v : adj.row(u)) incoming[v].push_back(u);
  std::vector<double> deg(adj.n, 0.0);
  std::vector<NodeId> merged;
  for (NodeId u = 0; u < adj.n; ++u) {
    merged.assign(adj.row(u).begin(), adj.row(u).end());
    merged.insert(merged.end(), incoming[u].begin(), incoming[u].end());
    merged.push_back(u);  // +I
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    deg[u] = static_cast<double>(merged.size());
  }
  return deg;
}

}  // namespace gttf
