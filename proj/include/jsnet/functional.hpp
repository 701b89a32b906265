#pragma once

// Network objective F, its separable surrogate R, the Landweber point and the
// plain Lasso objective. Used for monitoring and verification, not inside the
// solvers' hot loops.

#include <cstddef>
#include <vector>

#include "jsnet/core_model.hpp"
#include "jsnet/graph.hpp"
#include "jsnet/thresholding.hpp"

namespace jsnet {

/// One length-n estimate per node.
using NetworkIterate = std::vector<Vector>;

namespace detail {

inline void check_iterate(const NetworkIterate& X, const ProblemInstance& inst, const Topology& topo) {
  if (X.size() != inst.nodes || topo.size() != inst.nodes)
    throw InvalidDimension("iterate, instance and topology disagree on V");
  for (const auto& x : X)
    if (static_cast<std::size_t>(x.size()) != inst.n)
      throw InvalidDimension("iterate length differs from n");
}

}  // namespace detail

/// Fraction of the self-inclusive neighborhood of v whose component i is non-zero.
inline double mean_indicator(const NetworkIterate& X, const Topology& topo, std::size_t v, std::size_t i) {
  if (X.size() != topo.size()) throw InvalidDimension("mean_indicator: V mismatch");
  if (v >= X.size() || i >= static_cast<std::size_t>(X[v].size()))
    throw InvalidDimension("mean_indicator: index out of range");
  const auto ii = static_cast<Eigen::Index>(i);
  std::size_t active = X[v][ii] != 0.0 ? 1 : 0;
  for (auto u : topo.neighbors(v)) active += X[u][ii] != 0.0 ? 1 : 0;
  return static_cast<double>(active) / static_cast<double>(topo.degree(v));
}

/// F(X) = sum_v 1/2 ||y_v - A_v x_v||^2 + lambda sum_i g(alpha |x_vi| + mean_indicator(v, i)).
inline double eval_F(const NetworkIterate& X, const ProblemInstance& inst, const Topology& topo,
                     const AlgoParams& params) {
  detail::check_iterate(X, inst, topo);
  const McpPenalty g{params.beta};
  double total = 0.0;
  for (std::size_t v = 0; v < inst.nodes; ++v) {
    total += 0.5 * (inst.y[v] - inst.A[v] * X[v]).squaredNorm();
    double penalty = 0.0;
    for (std::size_t i = 0; i < inst.n; ++i) {
      const double arg = params.alpha * std::abs(X[v][static_cast<Eigen::Index>(i)]) +
                         mean_indicator(X, topo, v, i);
      penalty += g.value(arg);
    }
    total += params.lambda * penalty;
  }
  return total;
}

/// F with the penalty scaled by lambda / tau. A soft-threshold step of
/// lambda*alpha*w after a tau-sized gradient step is the exact minimizer of
/// this objective's separable surrogate, so DJ-IST does not increase it once
/// zero -> non-zero switches have ended.
inline double eval_objective(const NetworkIterate& X, const ProblemInstance& inst, const Topology& topo,
                             const AlgoParams& params) {
  AlgoParams scaled = params;
  scaled.lambda = params.lambda / params.tau;
  return eval_F(X, inst, topo, scaled);
}

/// Gradient (Landweber) point x + tau A^T (y - A x).
template <class Derived>
Vector landweber_z(const Vector& x, const Eigen::MatrixBase<Derived>& A, const Vector& y, double tau) {
  if (A.cols() != x.size() || A.rows() != y.size())
    throw InvalidDimension("landweber_z: dimension mismatch");
  return x + tau * (A.transpose() * (y - A * x));
}

/// R(X, B) = F(X) + 1/2 sum_v [ ||x_v - b_v||^2 / tau - ||A_v (x_v - b_v)||^2 ].
inline double eval_surrogate(const NetworkIterate& X, const NetworkIterate& B, const ProblemInstance& inst,
                             const Topology& topo, const AlgoParams& params) {
  detail::check_iterate(X, inst, topo);
  detail::check_iterate(B, inst, topo);
  double prox = 0.0;
  for (std::size_t v = 0; v < inst.nodes; ++v) {
    const Vector d = X[v] - B[v];
    prox += d.squaredNorm() / params.tau - (inst.A[v] * d).squaredNorm();
  }
  return eval_F(X, inst, topo, params) + 0.5 * prox;
}

template <class Derived>
double eval_lasso(const Vector& x, const Eigen::MatrixBase<Derived>& A, const Vector& y, double lambda) {
  if (A.cols() != x.size() || A.rows() != y.size())
    throw InvalidDimension("eval_lasso: dimension mismatch");
  return 0.5 * (y - A * x).squaredNorm() + lambda * x.lpNorm<1>();
}

}  // namespace jsnet
