#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gttf/graph.hpp"
#include "gttf/rng.hpp"

namespace gttf {

// Held-out link-prediction split over undirected canonical edges.
struct LinkSplit {
  std::uint64_t n = 0;
  EdgeList train;  // remaining edges plus self-loop fallback for orphans
  std::vector<std::pair<NodeId, NodeId>> test;
  std::vector<std::vector<std::pair<NodeId, NodeId>>> negatives;  // per test edge
  double fraction = 0.0;
  std::uint64_t seed = 0;
  bool train_connected = false;
};

// Deterministic split: canonicalize and dedup undirected edges, shuffle,
// hold out floor(fraction * m), rejection-sample non-edge negatives per test
// edge, and keep every node non-orphaned in the train set via self-loops.
inline LinkSplit make_split(const EdgeList& edges, double fraction,
                            std::uint64_t negatives_per_edge,
                            std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw std::invalid_argument("make_split: fraction must be in (0, 1)");
  LinkSplit split;
  split.n = edges.n;
  split.fraction = fraction;
  split.seed = seed;
  std::set<std::pair<NodeId, NodeId>> canonical;
  std::set<std::pair<NodeId, NodeId>> loops;
  for (const Edge& e : edges.edges) {
    if (e.src >= edges.n || e.dst >= edges.n)
      throw std::invalid_argument("make_split: edge id out of range");
    if (e.src == e.dst) {
      loops.insert({e.src, e.dst});
      continue;
    }
    canonical.insert({std::min(e.src, e.dst), std::max(e.src, e.dst)});
  }
  std::vector<std::pair<NodeId, NodeId>> pool(canonical.begin(), canonical.end());
  const auto held =
      static_cast<std::uint64_t>(fraction * static_cast<double>(pool.size()));
  if (held == 0)
    throw std::invalid_argument("make_split: graph too small to hold out an edge");
  SplitMix64 rng{hash_keys(seed, rng_tag::split)};
  for (std::uint64_t i = 0; i + 1 < pool.size(); ++i) {
    const std::uint64_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  split.test.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(held));
  split.train.n = edges.n;
  split.train.directed = false;
  std::vector<char> covered(edges.n, 0);
  for (auto it = pool.begin() + static_cast<std::ptrdiff_t>(held); it != pool.end(); ++it) {
    split.train.edges.push_back({it->first, it->second, 1.0});
    covered[it->first] = 1;
    covered[it->second] = 1;
  }
  for (const auto& [u, v] : loops) {
    split.train.edges.push_back({u, v, 1.0});
    covered[u] = 1;
  }
  for (NodeId u = 0; u < edges.n; ++u)
    if (!covered[u]) split.train.edges.push_back({u, u, 1.0});

  // Negatives: uniform non-edges of the FULL graph.
  const std::uint64_t want = negatives_per_edge * held;
  const std::uint64_t max_attempts = want * 100;
  std::uint64_t attempts = 0;
  split.negatives.resize(held);
  for (std::uint64_t i = 0; i < held; ++i) {
    for (std::uint64_t j = 0; j < negatives_per_edge; ++j) {
      while (true) {
        if (attempts++ >= max_attempts)
          throw std::runtime_error(
              "make_split: could not sample enough non-edge negatives");
        const NodeId a = rng.index(edges.n);
        const NodeId b = rng.index(edges.n);
        if (a == b) continue;
        const std::pair<NodeId, NodeId> key{std::min(a, b), std::max(a, b)};
        if (canonical.count(key)) continue;
        split.negatives[i].push_back(key);
        break;
      }
    }
  }
  CompactAdj train_adj = build_compact_adj(split.train, true);
  split.train_connected = is_connected(train_adj);
  return split;
}

struct ScoredPair {
  NodeId u = 0;
  NodeId v = 0;
  double score = 0.0;
  bool positive = false;
};

struct EvalScores {
  std::vector<ScoredPair> pairs;                    // pooled, for roc_auc
  std::vector<std::vector<ScoredPair>> groups;      // group[0] is the positive
};

// Dot-product scores for every test edge and its negatives.
inline EvalScores score_split(const Eigen::MatrixXd& z, const LinkSplit& split) {
  if (static_cast<std::uint64_t>(z.rows()) != split.n)
    throw std::invalid_argument("score_split: embedding rows != node count");
  EvalScores out;
  auto dot = [&](NodeId a, NodeId b) {
    const double s = z.row(static_cast<Eigen::Index>(a))
                         .dot(z.row(static_cast<Eigen::Index>(b)));
    if (!std::isfinite(s)) throw std::runtime_error("score_split: non-finite score");
    return s;
  };
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    std::vector<ScoredPair> group;
    const auto [u, v] = split.test[i];
    group.push_back({u, v, dot(u, v), true});
    for (const auto& [a, b] : split.negatives[i])
      group.push_back({a, b, dot(a, b), false});
    out.pairs.insert(out.pairs.end(), group.begin(), group.end());
    out.groups.push_back(std::move(group));
  }
  return out;
}

// Probability that a random positive outscores a random negative, ties at
// half credit; exact rank-sum evaluation.
inline double roc_auc(std::span<const ScoredPair> pairs) {
  std::vector<std::pair<double, bool>> scored;
  std::uint64_t npos = 0, nneg = 0;
  for (const auto& p : pairs) {
    scored.emplace_back(p.score, p.positive);
    p.positive ? ++npos : ++nneg;
  }
  if (npos == 0 || nneg == 0)
    throw std::invalid_argument("roc_auc: need at least one of each class");
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (scored[t].second) rank_sum_pos += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(npos), nn = static_cast<double>(nneg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

// Average 1-based rank of each group's positive among its negatives; ties
// take the average rank.
inline double mean_rank(const std::vector<std::vector<ScoredPair>>& groups) {
  if (groups.empty()) throw std::invalid_argument("mean_rank: no groups");
  double total = 0.0;
  for (const auto& group : groups) {
    if (group.empty()) throw std::invalid_argument("mean_rank: empty group");
    double pos_score = 0.0;
    bool found = false;
    for (const auto& p : group)
      if (p.positive) {
        pos_score = p.score;
        found = true;
        break;
      }
    if (!found) throw std::invalid_argument("mean_rank: group lacks a positive");
    double above = 0.0, ties = 0.0;
    for (const auto& p : group) {
      if (p.positive) continue;
      if (p.score > pos_score) above += 1.0;
      else if (p.score == pos_score) ties += 1.0;
    }
    total += 1.0 + above + ties / 2.0;
  }
  return total / static_cast<double>(groups.size());
}

}  // namespace gttf
