#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "gttf/estimators.hpp"
#include "gttf/graph.hpp"
#include "gttf/report.hpp"
#include "gttf/rng.hpp"
#include "gttf/stats.hpp"
#include "gttf/traversal.hpp"

namespace gttf {

// ---------------------------------------------------------------------------
// Message-passing support: sampled rooted adjacency + one-visit bias.
// ---------------------------------------------------------------------------

// Sampled adjacency accumulated during traversal. parents[u] holds every
// node that emitted u as a child (reversed traversal edges, set semantics).
// expanded[] marks nodes that emitted at least one child; the one-visit bias
// consults it so no node is expanded twice in a traversal.
struct RootedAdjacency {
  std::uint64_t n = 0;
  std::vector<std::set<NodeId>> parents;
  std::vector<char> expanded;
  std::vector<char> reached;

  explicit RootedAdjacency(std::uint64_t nodes = 0) { reset(nodes); }
  void reset(std::uint64_t nodes) {
    n = nodes;
    parents.assign(n, {});
    expanded.assign(n, 0);
    reached.assign(n, 0);
  }
  void mark_root(NodeId u) {
    if (u >= n) throw std::out_of_range("mark_root: id out of range");
    reached[u] = 1;
  }
};

inline void rooted_adj_accumulate(RootedAdjacency& state,
                                  std::span<const NodeId> path, NodeId u) {
  if (path.empty())
    throw std::invalid_argument("rooted_adj_accumulate: empty path");
  const NodeId parent = path.back();
  state.parents.at(u).insert(parent);
  state.expanded.at(parent) = 1;
  state.reached[u] = 1;
  state.reached[parent] = 1;
}

// Uniform 1/deg(u) while u has not yet been expanded; all-zero afterwards,
// which prunes the subtree.
inline void no_revisit_bias(const RootedAdjacency& state, const CompactAdj& adj,
                            NodeId u, std::span<double> mass) {
  if (state.expanded.at(u)) {
    std::fill(mass.begin(), mass.end(), 0.0);
    return;
  }
  const double w = 1.0 / static_cast<double>(adj.degree(u));
  std::fill(mass.begin(), mass.end(), w);
}

struct RootedAdjAccumulate {
  RootedAdjacency* state;
  void operator()(std::span<const NodeId> path, NodeId u, const VisitInfo&) const {
    rooted_adj_accumulate(*state, path, u);
  }
};

struct NoRevisitBias {
  const RootedAdjacency* state;
  const CompactAdj* adj;
  void operator()(std::span<const NodeId>, NodeId u, std::span<double> mass) const {
    no_revisit_bias(*state, *adj, u, mass);
  }
};
// Deliberately NOT marked stateless: it reads the mask that accumulation
// mutates, so expansions must commit in canonical order.

// One sampled rooted adjacency from a batched traversal.
inline RootedAdjacency sample_rooted_adjacency(const CompactAdj& adj,
                                               std::span<const NodeId> batch,
                                               std::span<const std::uint64_t> fanouts,
                                               RngStream rng,
                                               const TraverseOptions& opt = {}) {
  RootedAdjacency state(adj.n);
  for (NodeId u : batch) state.mark_root(u);
  traverse(adj, batch, fanouts, RootedAdjAccumulate{&state},
           NoRevisitBias{&state, &adj}, rng, opt);
  return state;
}

// Renormalized sampled adjacency restricted to reached nodes.
struct NormalizedAdjacency {
  std::vector<NodeId> nodes;   // sorted reached ids; index into mat
  Eigen::MatrixXd mat;         // renormalized matrix over reached nodes
  Eigen::VectorXd sampled_deg; // row sums of I + sampled adjacency
  Eigen::VectorXd full_deg;    // true augmented degrees, restricted
};

// mat = D'^{1/2} Dtilde'^{-1} (I + sampled) D'^{-1/2}. The identity is a
// set union: a self-parent edge does not double the diagonal. full_degrees
// are the augmented degrees of the whole graph (see augmented_degrees).
inline NormalizedAdjacency renormalize(const RootedAdjacency& state,
                                       std::span<const double> full_degrees) {
  if (full_degrees.size() != state.n)
    throw std::invalid_argument("renormalize: degree vector length mismatch");
  NormalizedAdjacency out;
  for (NodeId u = 0; u < state.n; ++u)
    if (state.reached[u]) out.nodes.push_back(u);
  if (out.nodes.empty()) throw std::invalid_argument("renormalize: nothing reached");
  std::map<NodeId, Eigen::Index> index;
  for (std::size_t i = 0; i < out.nodes.size(); ++i)
    index[out.nodes[i]] = static_cast<Eigen::Index>(i);
  const auto r = static_cast<Eigen::Index>(out.nodes.size());
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    aug(i, i) = 1.0;
    for (NodeId p : state.parents[out.nodes[static_cast<std::size_t>(i)]]) {
      auto it = index.find(p);
      if (it == index.end())
        throw std::logic_error("renormalize: stored parent was never reached");
      aug(i, it->second) = 1.0;
    }
  }
  out.sampled_deg = aug.rowwise().sum();
  out.full_deg.resize(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double d = full_degrees[out.nodes[static_cast<std::size_t>(i)]];
    if (d <= 0.0) throw std::invalid_argument("renormalize: non-positive full degree");
    out.full_deg(i) = d;
  }
  out.mat = aug;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j)
      out.mat(i, j) *= std::sqrt(out.full_deg(i)) /
                       (out.sampled_deg(i) * std::sqrt(out.full_deg(j)));
  return out;
}

// Exact E[renormalized matrix] for one-level sampling with the one-visit
// bias and batch = all nodes. Each node's row depends only on which
// potential parents drew it, and those hits are independent Bernoullis
// (parent w misses u with probability (1 - 1/deg(w))^f), so rows can be
// enumerated per node over parent subsets.
inline Eigen::MatrixXd expected_depth1_renormalized(
    const CompactAdj& adj, std::uint64_t f,
    std::span<const double> full_degrees) {
  const auto n = static_cast<Eigen::Index>(adj.n);
  std::vector<std::vector<NodeId>> incoming(adj.n);
  for (NodeId w = 0; w < adj.n; ++w)
    for (NodeId v : adj.row(w)) incoming[v].push_back(w);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (NodeId u = 0; u < adj.n; ++u) {
    std::vector<NodeId> cand;
    std::vector<double> hit;
    for (NodeId w : incoming[u]) {
      if (w == u) continue;  // a self-hit merges with the union diagonal
      cand.push_back(w);
      hit.push_back(1.0 - std::pow(1.0 - 1.0 / static_cast<double>(adj.degree(w)),
                                   static_cast<double>(f)));
    }
    if (cand.size() > 25)
      throw std::invalid_argument("expected_depth1_renormalized: row too wide");
    const std::uint64_t total = 1ULL << cand.size();
    const double su = std::sqrt(full_degrees[u]);
    for (std::uint64_t sub = 0; sub < total; ++sub) {
      double prob = 1.0;
      std::uint64_t size = 0;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        if (sub & (1ULL << i)) {
          prob *= hit[i];
          ++size;
        } else {
          prob *= 1.0 - hit[i];
        }
      }
      const double row_deg = 1.0 + static_cast<double>(size);
      const auto iu = static_cast<Eigen::Index>(u);
      out(iu, iu) += prob * su / (row_deg * su);
      for (std::size_t i = 0; i < cand.size(); ++i)
        if (sub & (1ULL << i))
          out(iu, static_cast<Eigen::Index>(cand[i])) +=
              prob * su / (row_deg * std::sqrt(full_degrees[cand[i]]));
    }
  }
  return out;
}

// Monte-Carlo audit of the mean renormalized matrix against the symmetric
// normalization of the full augmented graph, plus a cross-check against the
// exact one-level enumeration (which validates the sampler itself).
inline Report audit_renormalized_mean(const CompactAdj& adj, std::uint64_t f,
                                      std::uint64_t runs, RngStream rng) {
  const auto n = static_cast<Eigen::Index>(adj.n);
  std::vector<NodeId> batch(adj.n);
  for (NodeId u = 0; u < adj.n; ++u) batch[u] = u;
  const std::vector<double> full_deg = augmented_degrees(adj);
  const std::vector<std::uint64_t> fanouts{f};

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(n, n);
  for (std::uint64_t r = 0; r < runs; ++r) {
    RootedAdjacency state = sample_rooted_adjacency(
        adj, batch, fanouts, rng.substream(rng_tag::audit, r));
    NormalizedAdjacency norm = renormalize(state, full_deg);
    if (norm.nodes.size() != adj.n)
      throw std::logic_error("audit_renormalized_mean: full batch must reach all nodes");
    sum += norm.mat;
    sumsq += norm.mat.cwiseProduct(norm.mat);
  }
  const double dr = static_cast<double>(runs);
  Eigen::MatrixXd mean_mat = sum / dr;
  Eigen::MatrixXd var_mat =
      (sumsq - dr * mean_mat.cwiseProduct(mean_mat)) / (dr - 1.0);

  // Target: symmetric normalization of the full augmented graph.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n, n);
  for (NodeId u = 0; u < adj.n; ++u) {
    aug(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(u)) = 1.0;
    for (NodeId v : adj.row(u)) {
      aug(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = 1.0;
      aug(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = 1.0;
    }
  }
  Eigen::MatrixXd target(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      target(i, j) = aug(i, j) / std::sqrt(full_deg[static_cast<std::size_t>(i)] *
                                           full_deg[static_cast<std::size_t>(j)]);

  const Eigen::MatrixXd enum_mean =
      expected_depth1_renormalized(adj, f, full_deg);

  double max_sigma = 0.0, enum_max_sigma = 0.0, max_abs = 0.0;
  Eigen::Index worst_i = 0, worst_j = 0;
  std::uint64_t beyond = 0;
  bool pass = true, enum_pass = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double se = std::sqrt(std::max(var_mat(i, j), 0.0) / dr);
      const double dev = std::abs(mean_mat(i, j) - target(i, j));
      const double enum_dev = std::abs(mean_mat(i, j) - enum_mean(i, j));
      if (se > 1e-15) {
        const double sg = dev / se;
        if (sg > max_sigma) { max_sigma = sg; worst_i = i; worst_j = j; }
        if (sg > 5.0) { pass = false; ++beyond; }
        const double esg = enum_dev / se;
        enum_max_sigma = std::max(enum_max_sigma, esg);
        if (esg > 5.0) enum_pass = false;
      } else {
        if (dev > 1e-9) { pass = false; ++beyond; }
        if (enum_dev > 1e-9) enum_pass = false;
      }
      if (dev > max_abs) max_abs = dev;
    }
  }
  Report rep;
  rep.add("op", "audit_renormalized_mean");
  rep.add("n", std::uint64_t(adj.n));
  rep.add("f", f);
  rep.add("runs", runs);
  rep.add("max_abs_deviation", max_abs);
  rep.add("max_sigma", max_sigma);
  rep.add("worst_i", std::uint64_t(worst_i));
  rep.add("worst_j", std::uint64_t(worst_j));
  rep.add("entries_beyond_5se", beyond);
  rep.add("pass", pass);
  rep.add("enum_cross_check_max_sigma", enum_max_sigma);
  rep.add("enum_cross_check_pass", enum_pass);
  return rep;
}

// ---------------------------------------------------------------------------
// Shared gradient plumbing for the embedding accumulators.
// ---------------------------------------------------------------------------

// Dense gradient with an explicit touched-row set; untouched rows are never
// written, so an SGD step leaves them bit-identical.
struct GradBuffer {
  Eigen::MatrixXd g;
  std::set<NodeId> touched;

  void reset(Eigen::Index rows, Eigen::Index cols) {
    g = Eigen::MatrixXd::Zero(rows, cols);
    touched.clear();
  }
  void add(NodeId row, const Eigen::RowVectorXd& v) {
    g.row(static_cast<Eigen::Index>(row)) += v;
    touched.insert(row);
  }
};

// Degree^{3/4}-proportional negative sampling.
inline std::vector<NodeId> sample_negatives_degree(const CompactAdj& adj,
                                                   std::uint64_t count,
                                                   SplitMix64& rng) {
  std::vector<double> cum(adj.n);
  double run = 0.0;
  for (NodeId u = 0; u < adj.n; ++u) {
    run += std::pow(static_cast<double>(adj.degree(u)), 0.75);
    cum[u] = run;
  }
  std::vector<NodeId> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double r = rng.uniform() * run;
    out.push_back(static_cast<NodeId>(
        std::upper_bound(cum.begin(), cum.end(), r) - cum.begin()));
  }
  for (NodeId& u : out) u = std::min<NodeId>(u, adj.n - 1);
  return out;
}

inline std::vector<NodeId> sample_negatives_uniform(std::uint64_t n,
                                                    std::uint64_t count,
                                                    SplitMix64& rng) {
  std::vector<NodeId> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(rng.index(n));
  return out;
}

// ---------------------------------------------------------------------------
// Skip-gram style accumulator (shared by the uniform-bias and biased-walk
// trainers).
// ---------------------------------------------------------------------------

struct SkipGramState {
  double loss = 0.0;
  GradBuffer grad;
};

// For each emitted child u, pair it with the last min(C, |path|) path nodes.
// The k-back ancestor contributes weight (C - k + 1)/C scaled by the child's
// replication weight, and the pair's dot product is subtracted from the
// loss (the attraction term of the sampled softmax).
struct SkipGramAccum {
  const Eigen::MatrixXd* z;
  std::uint64_t window;
  SkipGramState* state;

  void operator()(std::span<const NodeId> path, NodeId u,
                  const VisitInfo& info) const {
    const double c = static_cast<double>(window);
    const std::uint64_t depth = path.size();
    const std::uint64_t ctx = std::min<std::uint64_t>(window, depth);
    const auto iu = static_cast<Eigen::Index>(u);
    for (std::uint64_t k = 1; k <= ctx; ++k) {
      const NodeId v = path[depth - k];
      const double coeff =
          info.weight * (c - static_cast<double>(k) + 1.0) / c;
      const auto iv = static_cast<Eigen::Index>(v);
      state->loss -= coeff * z->row(iu).dot(z->row(iv));
      state->grad.add(u, (-coeff) * z->row(iv));
      state->grad.add(v, (-coeff) * z->row(iu));
    }
  }
};

// Repulsion term of the sampled softmax: sum over batch nodes of
// log(mean_j exp<Z_u, Z_neg_j>), with gradients, evaluated stably.
inline double skipgram_repulsion(const Eigen::MatrixXd& z,
                                 std::span<const NodeId> batch,
                                 std::span<const NodeId> negatives,
                                 GradBuffer& grad) {
  if (negatives.empty()) return 0.0;
  double total = 0.0;
  std::vector<double> dots(negatives.size());
  for (NodeId u : batch) {
    const auto iu = static_cast<Eigen::Index>(u);
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < negatives.size(); ++j) {
      dots[j] = z.row(iu).dot(z.row(static_cast<Eigen::Index>(negatives[j])));
      hi = std::max(hi, dots[j]);
    }
    double sum_exp = 0.0;
    for (double d : dots) sum_exp += std::exp(d - hi);
    total += hi + std::log(sum_exp / static_cast<double>(negatives.size()));
    for (std::size_t j = 0; j < negatives.size(); ++j) {
      const double s = std::exp(dots[j] - hi) / sum_exp;  // softmax weight
      const auto iv = static_cast<Eigen::Index>(negatives[j]);
      grad.add(u, s * z.row(iv));
      grad.add(negatives[j], s * z.row(iu));
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Biased second-order walk weights.
// ---------------------------------------------------------------------------

namespace detail {
inline bool sorted_rows_intersect(std::span<const NodeId> a,
                                  std::span<const NodeId> b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j]) ++i; else ++j;
  }
  return false;
}
}  // namespace detail

// Return-parameter / in-out-parameter walk bias. Candidate i gets weight
// (1/p if i is the previous node) * (1/q if i shares a neighbor with the
// previous node); first step is uniform. Both discounts can apply to the
// same candidate.
struct BiasedWalk {
  const CompactAdj* adj;
  double p = 1.0;
  double q = 1.0;

  void operator()(std::span<const NodeId> prefix, NodeId u,
                  std::span<double> mass) const {
    if (p <= 0.0 || q <= 0.0)
      throw std::invalid_argument("biased walk: p and q must be positive");
    const auto row = adj->row(u);
    if (prefix.empty()) {
      std::fill(mass.begin(), mass.end(), 1.0);
      return;
    }
    const NodeId prev = prefix.back();
    const auto prev_row = adj->row(prev);
    for (std::size_t i = 0; i < row.size(); ++i) {
      double w = 1.0;
      if (row[i] == prev) w /= p;
      if (detail::sorted_rows_intersect(prev_row, adj->row(row[i]))) w /= q;
      mass[i] = w;
    }
  }
};
template <>
struct stateless_bias<BiasedWalk> : std::true_type {};

// ---------------------------------------------------------------------------
// Watch-your-step style accumulator: bilinear attention over full-depth
// walks with trainable context coefficients.
// ---------------------------------------------------------------------------

struct WysState {
  double loss = 0.0;
  GradBuffer grad_l;
  GradBuffer grad_r;
  Eigen::VectorXd grad_q;
};

struct WysAccum {
  const Eigen::MatrixXd* l;
  const Eigen::MatrixXd* r;
  const Eigen::VectorXd* q;
  WysState* state;

  void operator()(std::span<const NodeId> path, NodeId u,
                  const VisitInfo&) const {
    const auto depth = static_cast<Eigen::Index>(path.size());
    if (depth != q->size()) return;  // fires only at full context length
    const NodeId t = path[0];
    std::vector<NodeId> ctx(path.begin() + 1, path.end());
    ctx.push_back(u);
    const auto it = static_cast<Eigen::Index>(t);
    Eigen::RowVectorXd wl = Eigen::RowVectorXd::Zero(l->cols());
    Eigen::RowVectorXd wr = Eigen::RowVectorXd::Zero(r->cols());
    for (Eigen::Index j = 0; j < depth; ++j) {
      wl += (*q)(j) * l->row(static_cast<Eigen::Index>(ctx[static_cast<std::size_t>(j)]));
      wr += (*q)(j) * r->row(static_cast<Eigen::Index>(ctx[static_cast<std::size_t>(j)]));
    }
    const double s = r->row(it).dot(wl) + l->row(it).dot(wr);
    state->loss -= log_sigmoid(s);
    const double g = sigmoid(s) - 1.0;  // d(-log sigma(s))/ds
    state->grad_r.add(t, g * wl);
    state->grad_l.add(t, g * wr);
    for (Eigen::Index j = 0; j < depth; ++j) {
      const NodeId v = ctx[static_cast<std::size_t>(j)];
      const auto iv = static_cast<Eigen::Index>(v);
      state->grad_l.add(v, g * (*q)(j) * r->row(it));
      state->grad_r.add(v, g * (*q)(j) * l->row(it));
      state->grad_q(j) += g * (r->row(it).dot(l->row(iv)) +
                               l->row(it).dot(r->row(iv)));
    }
  }
};

// Repulsion: per batch node, softplus of the mean bilinear score against
// uniformly drawn nodes, with gradients through the mean.
inline double wys_repulsion(const Eigen::MatrixXd& l, const Eigen::MatrixXd& r,
                            std::span<const NodeId> batch,
                            std::span<const NodeId> negatives,
                            GradBuffer& grad_l, GradBuffer& grad_r) {
  if (negatives.empty()) return 0.0;
  const double m = static_cast<double>(negatives.size());
  double total = 0.0;
  for (NodeId u : batch) {
    const auto iu = static_cast<Eigen::Index>(u);
    double bar = 0.0;
    for (NodeId v : negatives) {
      const auto iv = static_cast<Eigen::Index>(v);
      bar += r.row(iu).dot(l.row(iv)) + r.row(iv).dot(l.row(iu));
    }
    bar /= m;
    total += softplus(bar);           // -log sigma(-bar)
    const double g = sigmoid(bar) / m;  // d softplus / d bar, spread over samples
    for (NodeId v : negatives) {
      const auto iv = static_cast<Eigen::Index>(v);
      grad_l.add(v, g * r.row(iu));
      grad_r.add(u, g * l.row(iv));
      grad_r.add(v, g * l.row(iu));
      grad_l.add(u, g * r.row(iv));
    }
  }
  return total;
}

}  // namespace gttf
