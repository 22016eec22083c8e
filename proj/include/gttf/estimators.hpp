#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gttf/graph.hpp"
#include "gttf/report.hpp"
#include "gttf/rng.hpp"
#include "gttf/traversal.hpp"

namespace gttf {

// Dense row-stochastic transition matrix; the trusted oracle for audits.
struct DenseTransition {
  Eigen::MatrixXd mat;
  std::uint64_t n() const { return static_cast<std::uint64_t>(mat.rows()); }
};

inline DenseTransition make_dense_transition(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("transition must be square");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) < 0.0) throw std::invalid_argument("transition entries must be >= 0");
      s += m(i, j);
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument("transition row " + std::to_string(i) +
                                  " sums to " + std::to_string(s));
  }
  return DenseTransition{std::move(m)};
}

// T = D^-1 A. With add_self_loops, the diagonal is set first (degree grows
// by one unless the loop already exists).
inline DenseTransition transition_from_adj(const CompactAdj& adj,
                                           bool add_self_loops = false) {
  const auto n = static_cast<Eigen::Index>(adj.n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (NodeId u = 0; u < adj.n; ++u)
    for (NodeId v : adj.row(u)) a(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = 1.0;
  if (add_self_loops) a.diagonal().setOnes();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = a.row(i).sum();
    if (d <= 0.0) throw std::invalid_argument("transition_from_adj: empty row");
    a.row(i) /= d;
  }
  return DenseTransition{std::move(a)};
}

constexpr std::uint64_t kDenseOracleMaxN = 10'000;

// Exact k-th power; desk-scale only.
inline DenseTransition exact_tk(const DenseTransition& t, std::uint64_t k) {
  if (t.n() > kDenseOracleMaxN)
    throw std::invalid_argument("exact_tk: n exceeds dense-oracle guard");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(t.mat.rows(), t.mat.cols());
  Eigen::MatrixXd base = t.mat;
  std::uint64_t e = k;
  while (e > 0) {
    if (e & 1) acc = acc * base;
    base = base * base;
    e >>= 1;
  }
  return DenseTransition{std::move(acc)};
}

// Sampled estimate of T^k restricted to the batch rows.
struct TransitionEstimate {
  std::vector<NodeId> batch;
  std::uint64_t k = 0;
  std::map<std::pair<NodeId, NodeId>, double> entries;

  double value(NodeId u, NodeId v) const {
    auto it = entries.find({u, v});
    return it == entries.end() ? 0.0 : it->second;
  }
};

// Depth-k visit counts divided by f^k; unbiased for T^k row-wise. Duplicate
// batch entries are collapsed so each row is estimated once.
inline TransitionEstimate estimate_tk(const CompactAdj& adj,
                                      std::span<const NodeId> batch,
                                      std::uint64_t k, std::uint64_t f,
                                      RngStream rng,
                                      const TraverseOptions& opt = {}) {
  if (k == 0 || f == 0) throw std::invalid_argument("estimate_tk: need k >= 1 and f >= 1");
  TransitionEstimate est;
  est.k = k;
  std::unordered_set<NodeId> seen;
  for (NodeId u : batch)
    if (seen.insert(u).second) est.batch.push_back(u);
  const std::vector<std::uint64_t> fanouts(k, f);
  auto noop = [](std::span<const NodeId>, NodeId, const VisitInfo&) {};
  WalkForest forest = traverse(adj, std::span<const NodeId>(est.batch), fanouts,
                               noop, UniformBias{}, rng, opt);
  const double scale = std::pow(static_cast<double>(f), static_cast<double>(k));
  for (const auto& tree : forest.trees)
    if (k < tree.levels.size())
      for (const auto& node : tree.levels[k])
        est.entries[{tree.seed, node.node}] += 1.0 / scale;
  return est;
}

// Exact per-start-node variance of depth-k visit counts under the sampled
// traversal (children drawn i.i.d. from the parent's row, subtrees
// independent given the parent). Returns Var(T_hat^k[u, v]) for every v.
// This accounts for the correlation between sibling walkers that share a
// prefix, which the closed-form 1/(4 f^k) bound ignores.
inline Eigen::VectorXd tree_exact_variance(const DenseTransition& t,
                                           std::uint64_t k, std::uint64_t f,
                                           NodeId u) {
  const auto n = static_cast<Eigen::Index>(t.n());
  if (static_cast<Eigen::Index>(u) >= n) throw std::out_of_range("tree_exact_variance: u");
  Eigen::VectorXd out(n);
  const double fd = static_cast<double>(f);
  for (Eigen::Index v = 0; v < n; ++v) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    m(v) = 1.0;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
    for (std::uint64_t j = 0; j < k; ++j) {
      Eigen::VectorXd tm = t.mat * m;
      Eigen::VectorXd second = t.mat * (var + m.cwiseProduct(m));
      var = fd * (second - tm.cwiseProduct(tm));
      m = fd * tm;
    }
    const double scale = std::pow(fd, 2.0 * static_cast<double>(k));
    out(v) = var(static_cast<Eigen::Index>(u)) / scale;
  }
  return out;
}

// Monte-Carlo check that the estimator mean matches the dense power.
inline Report audit_unbiasedness(const CompactAdj& adj,
                                 std::span<const NodeId> batch, std::uint64_t k,
                                 std::uint64_t f, std::uint64_t runs,
                                 RngStream rng) {
  const DenseTransition exact = exact_tk(transition_from_adj(adj), k);
  std::map<std::pair<NodeId, NodeId>, double> sums;
  std::vector<NodeId> rows;
  for (std::uint64_t r = 0; r < runs; ++r) {
    TransitionEstimate est =
        estimate_tk(adj, batch, k, f, rng.substream(rng_tag::audit, r));
    if (r == 0) rows = est.batch;
    for (const auto& [key, val] : est.entries) sums[key] += val;
  }
  const double var_bound =
      1.0 / (4.0 * std::pow(static_cast<double>(f), static_cast<double>(k)));
  const double tol = 5.0 * std::sqrt(var_bound / static_cast<double>(runs));
  double max_err = 0.0;
  NodeId worst_u = 0, worst_v = 0;
  for (NodeId u : rows) {
    for (NodeId v = 0; v < adj.n; ++v) {
      auto it = sums.find({u, v});
      const double mean_val =
          (it == sums.end() ? 0.0 : it->second) / static_cast<double>(runs);
      const double err = std::abs(
          mean_val - exact.mat(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)));
      if (err > max_err) { max_err = err; worst_u = u; worst_v = v; }
    }
  }
  Report rep;
  rep.add("op", "audit_unbiasedness");
  rep.add("n", std::uint64_t(adj.n));
  rep.add("k", k);
  rep.add("f", f);
  rep.add("runs", runs);
  rep.add("variance_bound", var_bound);
  rep.add("tolerance", tol);
  rep.add("max_abs_error", max_err);
  rep.add("worst_u", worst_u);
  rep.add("worst_v", worst_v);
  rep.add("pass", max_err <= tol);
  return rep;
}

// Monte-Carlo variance audit. Three comparisons per (u, v):
//   - the closed-form bound 1/(4 f^k) with 15% slack,
//   - the independence-assumption form T^k (1 - T^k) / f^k,
//   - the tree-exact recursion above (sibling correlation included).
// The first two are reported honestly; only the third is an implementation
// correctness check, since shared prefixes genuinely correlate walkers.
inline Report audit_variance(const CompactAdj& adj,
                             std::span<const NodeId> batch, std::uint64_t k,
                             std::uint64_t f, std::uint64_t runs,
                             RngStream rng) {
  const DenseTransition t = transition_from_adj(adj);
  const DenseTransition exact = exact_tk(t, k);
  std::map<std::pair<NodeId, NodeId>, double> sums, sumsq;
  std::vector<NodeId> rows;
  for (std::uint64_t r = 0; r < runs; ++r) {
    TransitionEstimate est =
        estimate_tk(adj, batch, k, f, rng.substream(rng_tag::audit, r));
    if (r == 0) rows = est.batch;
    for (const auto& [key, val] : est.entries) {
      sums[key] += val;
      sumsq[key] += val * val;
    }
  }
  const double fk = std::pow(static_cast<double>(f), static_cast<double>(k));
  const double bound = 1.0 / (4.0 * fk);
  const double rel_tol = 5.0 * std::sqrt(2.0 / static_cast<double>(runs > 1 ? runs - 1 : 1));
  double max_var = 0.0, bound_worst_exceed = 0.0;
  double indep_max_rel = 0.0, tree_max_rel = 0.0;
  NodeId worst_u = 0, worst_v = 0;
  bool bound_pass = true, indep_pass = true, tree_pass = true;
  for (NodeId u : rows) {
    const Eigen::VectorXd tree_var = tree_exact_variance(t, k, f, u);
    for (NodeId v = 0; v < adj.n; ++v) {
      auto key = std::make_pair(u, v);
      const double s = sums.count(key) ? sums[key] : 0.0;
      const double ss = sumsq.count(key) ? sumsq[key] : 0.0;
      const double mean_val = s / static_cast<double>(runs);
      double emp_var = 0.0;
      if (runs > 1)
        emp_var = std::max(0.0, (ss - static_cast<double>(runs) * mean_val * mean_val) /
                                    static_cast<double>(runs - 1));
      if (emp_var > max_var) { max_var = emp_var; worst_u = u; worst_v = v; }
      if (emp_var > bound * 1.15) {
        bound_pass = false;
        bound_worst_exceed = std::max(bound_worst_exceed, emp_var / bound);
      }
      const double p = exact.mat(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
      const double indep_form = p * (1.0 - p) / fk;
      if (indep_form > 1e-12) {
        const double rel = std::abs(emp_var - indep_form) / indep_form;
        indep_max_rel = std::max(indep_max_rel, rel);
        if (rel > rel_tol) indep_pass = false;
      } else if (emp_var > 1e-9) {
        indep_pass = false;
      }
      const double tv = tree_var(static_cast<Eigen::Index>(v));
      if (tv > 1e-12) {
        const double rel = std::abs(emp_var - tv) / tv;
        tree_max_rel = std::max(tree_max_rel, rel);
        if (rel > rel_tol) tree_pass = false;
      } else if (emp_var > 1e-9) {
        tree_pass = false;
      }
    }
  }
  Report rep;
  rep.add("op", "audit_variance");
  rep.add("n", std::uint64_t(adj.n));
  rep.add("k", k);
  rep.add("f", f);
  rep.add("runs", runs);
  rep.add("bound", bound);
  rep.add("bound_slack", 0.15);
  rep.add("max_empirical_variance", max_var);
  rep.add("worst_u", worst_u);
  rep.add("worst_v", worst_v);
  rep.add("bound_pass", bound_pass);
  if (!bound_pass) rep.add("bound_worst_ratio", bound_worst_exceed);
  rep.add("indep_form_max_rel_dev", indep_max_rel);
  rep.add("indep_form_pass", indep_pass);
  rep.add("tree_exact_max_rel_dev", tree_max_rel);
  rep.add("tree_exact_pass", tree_pass);
  rep.add("pass", bound_pass);
  return rep;
}

}  // namespace gttf
