#pragma once

// Distributed OMP baselines with candidate voting.
//
// DC-OMP 1: every unfinished node sends its OMP candidate index to its
// neighbors; candidates seen at least twice in the self-inclusive
// neighborhood (and not yet in the node's support) are added, otherwise the
// node adds its own candidate.
//
// DC-OMP 2: every node sends its full correlation vector |A_v^T r_v| to its
// neighbors, picks its candidate from the fused (summed) correlations and
// floods it to the whole network; voting as above over all V candidates.
// All nodes keep exchanging until the last node completes its support.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "jsnet/core_model.hpp"
#include "jsnet/graph.hpp"
#include "jsnet/ledger.hpp"
#include "jsnet/metrics.hpp"
#include "jsnet/run_result.hpp"

namespace jsnet {

namespace detail {

/// Highest score among free columns, lowest index on ties.
inline std::size_t argmax_free(const Vector& score, const SupportMask& in_support) {
  std::size_t best = in_support.size();
  double best_score = -1.0;
  for (std::size_t i = 0; i < in_support.size(); ++i) {
    if (in_support[i]) continue;
    const double s = score[static_cast<Eigen::Index>(i)];
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  if (best == in_support.size()) throw InvalidDimension("omp_candidate: support already covers every column");
  return best;
}

}  // namespace detail

/// argmax_i |a_i^T r| over columns not in `in_support`; ties go to the lowest
/// index. With a zero residual this is the lowest free index.
template <class Derived>
std::size_t omp_candidate(const Vector& residual, const Eigen::MatrixBase<Derived>& A, const SupportMask& in_support) {
  if (A.rows() != residual.size() || static_cast<std::size_t>(A.cols()) != in_support.size())
    throw InvalidDimension("omp_candidate: dimension mismatch");
  const Vector corr = A.transpose() * residual;
  return detail::argmax_free(corr.cwiseAbs(), in_support);
}

/// Least squares on the selected columns via the normal equations.
template <class Derived>
Vector least_squares_on_support(const Eigen::MatrixBase<Derived>& A, const Vector& y,
                                const std::vector<std::size_t>& support) {
  if (A.rows() != y.size()) throw InvalidDimension("least_squares_on_support: y length differs from m");
  if (support.size() > static_cast<std::size_t>(A.rows()))
    throw SingularSystem("least_squares_on_support: more columns than measurements");
  const Eigen::MatrixXd As = restrict_columns(A, support);
  const Eigen::MatrixXd gram = As.transpose() * As;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-13)
    throw SingularSystem("least_squares_on_support: selected columns are rank deficient");
  return llt.solve(As.transpose() * y);
}

namespace detail {

struct OmpNode {
  std::vector<std::size_t> support;  // insertion order
  SupportMask mask;
  Vector coef;
  Vector residual;
  bool done = false;
};

/// Refit on the current support. Once the support has as many columns as
/// measurements the fit interpolates y; the minimum-norm solution is used.
template <class Derived>
void refit(OmpNode& node, const Eigen::MatrixBase<Derived>& A, const Vector& y) {
  if (node.support.size() < static_cast<std::size_t>(A.rows())) {
    try {
      node.coef = least_squares_on_support(A, y, node.support);
      node.residual = y - restrict_columns(A, node.support) * node.coef;
      return;
    } catch (const SingularSystem&) {
    }
  }
  const Eigen::MatrixXd As = restrict_columns(A, node.support);
  node.coef = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(As).solve(y);
  node.residual = y - As * node.coef;
}

/// Adds up to (k - |S|) candidates seen at least twice and not yet in S,
/// most votes first, then lowest index; falls back to the node's own candidate.
inline void vote(OmpNode& node, std::size_t own, const std::vector<std::size_t>& pool, std::size_t k) {
  std::map<std::size_t, std::size_t> counts;
  for (auto c : pool) ++counts[c];
  std::vector<std::pair<std::size_t, std::size_t>> eligible;  // (votes, index)
  for (auto [idx, votes] : counts)
    if (votes >= 2 && !node.mask[idx]) eligible.emplace_back(votes, idx);
  std::stable_sort(eligible.begin(), eligible.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> added;
  for (const auto& [votes, idx] : eligible) {
    if (node.support.size() + added.size() >= k) break;
    added.push_back(idx);
  }
  if (added.empty()) added.push_back(own);
  for (auto idx : added) {
    node.support.push_back(idx);
    node.mask[idx] = 1;
  }
}

inline std::vector<OmpNode> init_omp(const ProblemInstance& inst) {
  std::vector<OmpNode> nodes(inst.nodes);
  for (std::size_t v = 0; v < inst.nodes; ++v) {
    nodes[v].mask.assign(inst.n, 0);
    nodes[v].residual = inst.y[v];
    nodes[v].coef.resize(0);
  }
  return nodes;
}

inline RunResult finish_omp(const ProblemInstance& inst, const std::vector<OmpNode>& nodes, std::size_t rounds,
                            MessageLedger ledger) {
  RunResult result;
  result.rounds = rounds;
  result.converged = true;
  result.ledger = std::move(ledger);
  result.stabilization.t1 = rounds;
  for (const auto& node : nodes) {
    Vector x = Vector::Zero(static_cast<Eigen::Index>(inst.n));
    std::vector<std::size_t> sorted = node.support;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> signs;
    for (std::size_t j = 0; j < node.support.size(); ++j)
      x[static_cast<Eigen::Index>(node.support[j])] = node.coef[static_cast<Eigen::Index>(j)];
    for (auto i : sorted) signs.push_back(x[static_cast<Eigen::Index>(i)] >= 0.0 ? 1 : -1);
    result.estimates.push_back(std::move(x));
    result.supports.push_back(node.mask);
    result.stabilization.supports.push_back(std::move(sorted));
    result.stabilization.signs.push_back(std::move(signs));
  }
  return result;
}

inline void check_omp_inputs(const ProblemInstance& inst, const Topology& topo) {
  if (topo.size() != inst.nodes) throw InvalidDimension("topology size differs from V");
  if (inst.k == 0 || inst.k > inst.n) throw InvalidDimension("DC-OMP needs 1 <= k <= n");
}

}  // namespace detail

inline RunResult run_dcomp1(const ProblemInstance& inst, const Topology& topo, const AlgoParams& params = {}) {
  (void)params;
  detail::check_omp_inputs(inst, topo);
  auto nodes = detail::init_omp(inst);
  MessageLedger ledger(inst.nodes);
  std::size_t round = 0;
  std::vector<std::size_t> candidate(inst.nodes);
  while (!std::all_of(nodes.begin(), nodes.end(), [](const auto& s) { return s.done; })) {
    ++round;
    for (std::size_t v = 0; v < inst.nodes; ++v) {
      if (nodes[v].done) continue;
      candidate[v] = omp_candidate(nodes[v].residual, inst.A[v], nodes[v].mask);
      record_candidate_index(ledger, round, v, topo.fanout(v), inst.n, candidate[v]);
    }
    // all candidates of this round are read before any support changes
    std::vector<std::vector<std::size_t>> pools(inst.nodes);
    for (std::size_t v = 0; v < inst.nodes; ++v) {
      if (nodes[v].done) continue;
      pools[v].push_back(candidate[v]);
      for (auto u : topo.neighbors(v))
        if (!nodes[u].done) pools[v].push_back(candidate[u]);
    }
    for (std::size_t v = 0; v < inst.nodes; ++v) {
      auto& node = nodes[v];
      if (node.done) continue;
      detail::vote(node, candidate[v], pools[v], inst.k);
      detail::refit(node, inst.A[v], inst.y[v]);
      node.done = node.support.size() >= inst.k;
    }
  }
  return detail::finish_omp(inst, nodes, round, std::move(ledger));
}

inline RunResult run_dcomp2(const ProblemInstance& inst, const Topology& topo, const AlgoParams& params = {}) {
  detail::check_omp_inputs(inst, topo);
  auto nodes = detail::init_omp(inst);
  MessageLedger ledger(inst.nodes);
  std::size_t round = 0;
  std::vector<Vector> corr(inst.nodes);
  std::vector<std::size_t> candidate(inst.nodes);
  while (!std::all_of(nodes.begin(), nodes.end(), [](const auto& s) { return s.done; })) {
    ++round;
    for (std::size_t v = 0; v < inst.nodes; ++v) {
      corr[v] = (inst.A[v].transpose() * nodes[v].residual).cwiseAbs();
      record_correlation_vector(ledger, round, v, topo.fanout(v), inst.n, params.q);
    }
    for (std::size_t v = 0; v < inst.nodes; ++v) {
      Vector fused = corr[v];
      for (auto u : topo.neighbors(v)) fused += corr[u];
      candidate[v] = detail::argmax_free(fused, nodes[v].mask);
      record_candidate_index(ledger, round, v, inst.nodes - 1, inst.n, candidate[v]);
    }
    for (std::size_t v = 0; v < inst.nodes; ++v) {
      auto& node = nodes[v];
      if (node.done) continue;
      detail::vote(node, candidate[v], candidate, inst.k);
      detail::refit(node, inst.A[v], inst.y[v]);
      node.done = node.support.size() >= inst.k;
    }
  }
  return detail::finish_omp(inst, nodes, round, std::move(ledger));
}

}  // namespace jsnet
