#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "gttf/graph.hpp"
#include "gttf/rng.hpp"

namespace gttf {

// One node of a materialized walk tree. parent_slot indexes the previous
// level (0 and unused at the root). weight is the replication weight: 1 at
// the root, divided by the emitted child count at each expansion.
struct ForestNode {
  NodeId node = 0;
  std::uint64_t parent_slot = 0;
  double weight = 1.0;
};

struct WalkTree {
  NodeId seed = 0;
  std::vector<std::vector<ForestNode>> levels;  // levels[0] = {seed}
};

struct WalkForest {
  std::vector<WalkTree> trees;

  NodeId node_at(std::uint64_t tree, std::uint64_t depth,
                 std::uint64_t slot) const {
    return trees.at(tree).levels.at(depth).at(slot).node;
  }
};

// Context passed to the accumulate callback for every non-root node.
struct VisitInfo {
  std::uint64_t tree = 0;         // tree index within the batch
  std::uint64_t depth = 0;        // child depth (root is depth 0)
  std::uint64_t slot = 0;         // child slot within its level
  std::uint64_t parent_slot = 0;  // parent slot within the previous level
  std::uint64_t fanout = 0;       // configured fanout at this level
  std::uint64_t emitted = 0;      // children actually emitted by this parent
  double weight = 1.0;            // replication weight of the child
};

struct TraverseOptions {
  std::uint64_t workers = 1;
  bool without_replacement = false;
};

// Biases that depend only on (graph, path, node) — not on state mutated by
// accumulate callbacks — may be marked stateless; only then can candidate
// scoring and sampling run on multiple workers. Accumulation itself always
// commits in canonical (tree, depth, slot) order, so results never depend on
// the worker count.
template <class B>
struct stateless_bias : std::false_type {};
template <class B>
inline constexpr bool stateless_bias_v = stateless_bias<std::remove_cvref_t<B>>::value;

struct UniformBias {
  void operator()(std::span<const NodeId>, NodeId, std::span<double> mass) const {
    std::fill(mass.begin(), mass.end(), 1.0);
  }
};
template <>
struct stateless_bias<UniformBias> : std::true_type {};

// Categorical sampling with replacement: cumulative sum + binary search.
// A draw equal to a boundary selects the higher index, so zero-weight
// candidates are unselectable. Weights must already be normalized.
inline std::vector<NodeId> sample(std::span<const NodeId> candidates,
                                  std::span<const double> weights,
                                  std::uint64_t f, SplitMix64& rng) {
  if (candidates.empty()) throw std::invalid_argument("sample: no candidates");
  if (candidates.size() != weights.size())
    throw std::invalid_argument("sample: weights misaligned with candidates");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("sample: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("sample: weights must sum to 1 (got " +
                                std::to_string(total) + ")");
  std::vector<double> cum(weights.size());
  double run = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    run += weights[i];
    cum[i] = run;
    if (weights[i] > 0.0) last_positive = i;
  }
  std::vector<NodeId> out;
  out.reserve(f);
  for (std::uint64_t j = 0; j < f; ++j) {
    const double r = rng.uniform();
    auto it = std::upper_bound(cum.begin(), cum.end(), r);
    std::size_t idx = it == cum.end() ? last_positive
                                      : static_cast<std::size_t>(it - cum.begin());
    // Guard against landing on a zero-weight slot via float round-off.
    while (idx > 0 && weights[idx] == 0.0) --idx;
    out.push_back(candidates[idx]);
  }
  return out;
}

namespace detail {

// f draws without replacement over positive-mass candidates; when the
// support is smaller than f, every positive-mass candidate is emitted once
// in ascending order. `mass` is consumed.
inline std::vector<std::size_t> sample_wor_indices(std::span<double> mass,
                                                   std::uint64_t f,
                                                   SplitMix64& rng) {
  std::size_t support = 0;
  for (double w : mass)
    if (w > 0.0) ++support;
  std::vector<std::size_t> picks;
  if (support <= f) {
    for (std::size_t i = 0; i < mass.size(); ++i)
      if (mass[i] > 0.0) picks.push_back(i);
    return picks;
  }
  picks.reserve(f);
  double total = 0.0;
  for (double w : mass) total += w;
  for (std::uint64_t j = 0; j < f; ++j) {
    const double r = rng.uniform() * total;
    double run = 0.0;
    std::size_t idx = mass.size();
    for (std::size_t i = 0; i < mass.size(); ++i) {
      if (mass[i] <= 0.0) continue;
      run += mass[i];
      if (r < run) { idx = i; break; }
      idx = i;  // fall back to the last positive slot on round-off
    }
    picks.push_back(idx);
    total -= mass[idx];
    mass[idx] = 0.0;
  }
  return picks;
}

struct Expansion {
  bool pruned = true;
  std::uint64_t emitted = 0;
  std::vector<NodeId> children;
};

// Root-to-node path for (depth, slot) of one tree, written into buf.
inline void path_to(const WalkTree& tree, std::uint64_t depth,
                    std::uint64_t slot, std::vector<NodeId>& buf) {
  buf.resize(depth + 1);
  std::uint64_t idx = slot;
  for (std::uint64_t d = depth;; --d) {
    buf[d] = tree.levels[d][idx].node;
    if (d == 0) break;
    idx = tree.levels[d][idx].parent_slot;
  }
}

}  // namespace detail

// Batched stochastic traversal. Each batch entry roots one tree. Per level,
// every frontier node queries the bias over its neighbor row, the mass is
// normalized (all-zero mass prunes the subtree), `fanout` children are drawn,
// and `accumulate(path_to_parent, child, info)` fires once per emitted child
// in canonical (tree, slot) order. Draws come from counter substreams keyed
// by (seed, tree, depth, slot), so results are reproducible and independent
// of the worker count.
template <class Acc, class Bias = UniformBias>
WalkForest traverse(const CompactAdj& adj, std::span<const NodeId> batch,
                    std::span<const std::uint64_t> fanouts, Acc&& accumulate,
                    Bias&& bias, RngStream rng, const TraverseOptions& opt = {}) {
  if (batch.empty()) throw std::invalid_argument("traverse: empty batch");
  for (NodeId u : batch)
    if (!adj.valid(u)) throw std::out_of_range("traverse: seed id out of range");
  for (std::uint64_t f : fanouts)
    if (f == 0) throw std::invalid_argument("traverse: fanout must be >= 1");

  WalkForest forest;
  forest.trees.resize(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    forest.trees[t].seed = batch[t];
    forest.trees[t].levels.assign(1, {ForestNode{batch[t], 0, 1.0}});
  }

  std::vector<double> mass;
  std::vector<NodeId> path;

  auto expand = [&](std::uint64_t t, std::uint64_t level, std::uint64_t p,
                    std::uint64_t f, std::vector<double>& mass_buf,
                    std::vector<NodeId>& path_buf) -> detail::Expansion {
    detail::Expansion ex;
    const WalkTree& tree = forest.trees[t];
    const NodeId u = tree.levels[level][p].node;
    const auto row = adj.row(u);
    mass_buf.resize(row.size());
    detail::path_to(tree, level, p, path_buf);
    bias(std::span<const NodeId>(path_buf.data(), level), u,
         std::span<double>(mass_buf));
    double total = 0.0;
    for (double w : mass_buf) {
      if (w < 0.0) throw std::invalid_argument("traverse: bias returned negative mass");
      total += w;
    }
    if (total < 1e-12) return ex;  // prune: no children, no callbacks
    ex.pruned = false;
    SplitMix64 sub{hash_keys(rng.seed, rng_tag::traverse, t, level, p)};
    if (opt.without_replacement) {
      auto picks = detail::sample_wor_indices(std::span<double>(mass_buf), f, sub);
      ex.emitted = picks.size();
      ex.children.reserve(picks.size());
      for (std::size_t i : picks) ex.children.push_back(row[i]);
    } else {
      for (double& w : mass_buf) w /= total;
      ex.children = sample(row, mass_buf, f, sub);
      ex.emitted = f;
    }
    return ex;
  };

  auto commit = [&](std::uint64_t t, std::uint64_t level, std::uint64_t p,
                    std::uint64_t f, const detail::Expansion& ex,
                    std::vector<NodeId>& path_buf) {
    if (ex.pruned) return;
    WalkTree& tree = forest.trees[t];
    const double parent_weight = tree.levels[level][p].weight;
    const double w = parent_weight / static_cast<double>(ex.emitted);
    detail::path_to(tree, level, p, path_buf);
    auto& next = tree.levels[level + 1];
    for (NodeId v : ex.children) {
      const std::uint64_t slot = next.size();
      next.push_back(ForestNode{v, p, w});
      VisitInfo info{t, level + 1, slot, p, f, ex.emitted, w};
      accumulate(std::span<const NodeId>(path_buf.data(), level + 1), v, info);
    }
  };

  for (std::uint64_t level = 0; level < fanouts.size(); ++level) {
    const std::uint64_t f = fanouts[level];
    for (auto& tree : forest.trees) tree.levels.emplace_back();

    const bool parallel =
        opt.workers > 1 && stateless_bias_v<Bias> && forest.trees.size() > 0;
    if (parallel) {
      // Phase A: score + sample every frontier node on worker threads.
      std::vector<std::pair<std::uint64_t, std::uint64_t>> parents;
      for (std::uint64_t t = 0; t < forest.trees.size(); ++t)
        for (std::uint64_t p = 0; p < forest.trees[t].levels[level].size(); ++p)
          parents.emplace_back(t, p);
      std::vector<detail::Expansion> results(parents.size());
      const std::uint64_t nw = std::min<std::uint64_t>(opt.workers, std::max<std::size_t>(parents.size(), 1));
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(nw);
      for (std::uint64_t w = 0; w < nw; ++w) {
        pool.emplace_back([&, w] {
          std::vector<double> tl_mass;
          std::vector<NodeId> tl_path;
          try {
            for (std::size_t i = w; i < parents.size(); i += nw) {
              auto [t, p] = parents[i];
              results[i] = expand(t, level, p, f, tl_mass, tl_path);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
      // Phase B: sequential canonical commit.
      for (std::size_t i = 0; i < parents.size(); ++i)
        commit(parents[i].first, level, parents[i].second, f, results[i], path);
    } else {
      // Sequential: expansion and commit interleave, so a stateful bias
      // observes accumulate effects from earlier slots of the same level.
      for (std::uint64_t t = 0; t < forest.trees.size(); ++t) {
        const std::uint64_t width = forest.trees[t].levels[level].size();
        for (std::uint64_t p = 0; p < width; ++p) {
          auto ex = expand(t, level, p, f, mass, path);
          commit(t, level, p, f, ex, path);
        }
      }
    }
  }
  return forest;
}

// Convenience overload: uniform bias.
template <class Acc>
WalkForest traverse(const CompactAdj& adj, std::span<const NodeId> batch,
                    std::span<const std::uint64_t> fanouts, Acc&& accumulate,
                    RngStream rng, const TraverseOptions& opt = {}) {
  return traverse(adj, batch, fanouts, std::forward<Acc>(accumulate),
                  UniformBias{}, rng, opt);
}

// Number of slots at depth k equal to v, summed over every tree seeded at u.
inline std::uint64_t walk_forest_counts(const WalkForest& forest, NodeId u,
                                        std::uint64_t k, NodeId v) {
  bool seen = false;
  std::uint64_t count = 0;
  for (const auto& tree : forest.trees) {
    if (tree.seed != u) continue;
    seen = true;
    if (k < tree.levels.size())
      for (const auto& node : tree.levels[k])
        if (node.node == v) ++count;
  }
  if (!seen) throw std::invalid_argument("walk_forest_counts: node is not a seed");
  return count;
}

inline void dump_walk_forest(std::ostream& out, const WalkForest& forest) {
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    const auto& tree = forest.trees[t];
    for (std::size_t d = 0; d < tree.levels.size(); ++d)
      for (std::size_t s = 0; s < tree.levels[d].size(); ++s)
        out << t << '\t' << d << '\t' << s << '\t' << tree.levels[d][s].node
            << '\t' << tree.levels[d][s].parent_slot << '\n';
  }
}

}  // namespace gttf
