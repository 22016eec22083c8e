#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gttf/graph.hpp"
#include "gttf/rng.hpp"

namespace gttf {

// G(n, p): each unordered pair independently with probability p. Uses
// geometric gap sampling over the pair sequence, so the cost is O(n + m)
// rather than O(n^2).
inline EdgeList erdos_renyi(std::uint64_t n, double p, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("erdos_renyi: n must be positive");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("erdos_renyi: p outside [0, 1]");
  SplitMix64 rng{hash_keys(seed, rng_tag::generator, 1ULL)};
  EdgeList list;
  list.n = n;
  if (p <= 0.0) return list;
  if (p >= 1.0) {
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j) list.edges.push_back({i, j, 1.0});
    return list;
  }
  const double log1mp = std::log(1.0 - p);
  std::uint64_t v = 1;
  std::int64_t w = -1;
  while (v < n) {
    const double r = 1.0 - rng.uniform();  // in (0, 1]
    w += 1 + static_cast<std::int64_t>(std::floor(std::log(r) / log1mp));
    while (w >= static_cast<std::int64_t>(v) && v < n) {
      w -= static_cast<std::int64_t>(v);
      ++v;
    }
    if (v < n) list.edges.push_back({static_cast<NodeId>(w), v, 1.0});
  }
  return list;
}

// Random alpha-regular graph via the pairing model: alpha stubs per node,
// shuffled and paired; resample whole pairings that produce a self-loop or a
// repeated edge. Requires n * alpha even and alpha < n.
inline EdgeList random_regular(std::uint64_t n, std::uint64_t alpha,
                               std::uint64_t seed) {
  if (alpha == 0 || n == 0)
    throw std::invalid_argument("random_regular: n and alpha must be positive");
  if (alpha >= n)
    throw std::invalid_argument("random_regular: need alpha < n");
  if ((n * alpha) % 2 != 0)
    throw std::invalid_argument("random_regular: n * alpha must be even");
  SplitMix64 rng{hash_keys(seed, rng_tag::generator, 2ULL)};
  std::vector<NodeId> stubs(n * alpha);
  for (std::uint64_t i = 0; i < stubs.size(); ++i) stubs[i] = i / alpha;
  constexpr int kMaxAttempts = 2000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (std::uint64_t i = stubs.size() - 1; i > 0; --i)
      std::swap(stubs[i], stubs[rng.index(i + 1)]);
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(stubs.size() / 2);
    bool ok = true;
    for (std::uint64_t i = 0; i + 1 < stubs.size(); i += 2) {
      NodeId a = stubs[i], b = stubs[i + 1];
      if (a == b) { ok = false; break; }
      if (a > b) std::swap(a, b);
      pairs.emplace_back(a, b);
    }
    if (!ok) continue;
    std::sort(pairs.begin(), pairs.end());
    if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end()) continue;
    EdgeList list;
    list.n = n;
    for (auto [a, b] : pairs) list.edges.push_back({a, b, 1.0});
    return list;
  }
  throw std::runtime_error(
      "random_regular: no simple pairing found after " +
      std::to_string(kMaxAttempts) + " attempts (n=" + std::to_string(n) +
      ", alpha=" + std::to_string(alpha) + ")");
}

// Small hand-checkable demo graph: a star centered at node 1 over
// {0, 2, 3, 4} plus the extra edge 3-4. Degrees are [1, 4, 1, 2, 2].
inline EdgeList demo_graph() {
  EdgeList list;
  list.n = 5;
  list.edges = {{0, 1, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}, {1, 4, 1.0}, {3, 4, 1.0}};
  return list;
}

// Two cliques of n/2 nodes each, joined by a single bridge edge. n must be
// even and at least 4.
inline EdgeList barbell(std::uint64_t n) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("barbell: n must be even and >= 4");
  const std::uint64_t k = n / 2;
  EdgeList list;
  list.n = n;
  for (std::uint64_t base : {std::uint64_t{0}, k})
    for (NodeId i = 0; i < k; ++i)
      for (NodeId j = i + 1; j < k; ++j)
        list.edges.push_back({base + i, base + j, 1.0});
  list.edges.push_back({k - 1, k, 1.0});
  return list;
}

}  // namespace gttf
