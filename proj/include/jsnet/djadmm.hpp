#pragma once

// DJ-ADMM: DJ-IST with the thresholding step replaced by one scaled-form ADMM
// step on the node's weighted Lasso. The sparse splitting variable z drives
// messaging, weights and the stopping test; NodeState::x holds z.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "jsnet/djist.hpp"

namespace jsnet {

struct AdmmNodeState : NodeState {
  Vector ridge;  // x-update of ADMM (generically dense)
  Vector mu;     // scaled dual
  Vector aty;    // A^T y
  Eigen::LLT<Eigen::MatrixXd> factor;  // A^T A + rho I
  double rho = 1.0;
};

/// Caches A^T y and the Cholesky factor of A^T A + rho I; starts from
/// ridge = z = x0, mu = 0.
template <class Derived>
AdmmNodeState make_admm_state(const Eigen::MatrixBase<Derived>& A, const Vector& y, double rho, const Vector& x0) {
  if (!(rho > 0.0)) throw InvalidParameter("rho must be > 0");
  if (A.rows() != y.size() || A.cols() != x0.size()) throw InvalidDimension("make_admm_state: dimension mismatch");
  AdmmNodeState s;
  s.rho = rho;
  s.aty = A.transpose() * y;
  Eigen::MatrixXd gram = A.transpose() * A;
  gram.diagonal().array() += rho;
  s.factor.compute(gram);
  if (s.factor.info() != Eigen::Success) throw SingularSystem("A^T A + rho I is not positive definite");
  s.x = x0;
  s.ridge = x0;
  s.mu = Vector::Zero(x0.size());
  return s;
}

namespace detail {

inline void admm_ridge_update(AdmmNodeState& s) { s.ridge = s.factor.solve(s.aty + s.rho * (s.x - s.mu)); }

inline Vector admm_z_proposal(const AdmmNodeState& s, const Vector& weights, const AlgoParams& params) {
  Vector z = s.ridge + s.mu;
  const double scale = params.lambda * params.alpha / s.rho;
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = soft(z[i], scale * weights[i]);
  return z;
}

}  // namespace detail

/// One ADMM step with fixed weights w:
///   x <- (A^T A + rho I)^-1 [A^T y + rho (z - mu)]
///   z <- soft(x + mu, lambda alpha w / rho)
///   mu <- mu + x - z
inline void admm_node_step(AdmmNodeState& s, const Vector& weights, const AlgoParams& params) {
  if (weights.size() != s.x.size()) throw InvalidDimension("admm_node_step: weight length differs from n");
  detail::admm_ridge_update(s);
  s.x = detail::admm_z_proposal(s, weights, params);
  s.mu += s.ridge - s.x;
}

inline std::vector<AdmmNodeState> init_admm_states(const ProblemInstance& inst, const Topology& topo,
                                                   const AlgoParams& params) {
  if (topo.size() != inst.nodes) throw InvalidDimension("topology size differs from V");
  std::vector<AdmmNodeState> states;
  states.reserve(inst.nodes);
  for (std::size_t v = 0; v < inst.nodes; ++v) {
    const Vector x0 = inst.A[v].transpose() * inst.y[v];
    states.push_back(make_admm_state(inst.A[v], inst.y[v], params.rho, x0));
    detail::init_exchange(states.back(), topo, v, inst.n);
  }
  return states;
}

inline RoundOutcome djadmm_round(std::vector<AdmmNodeState>& states, const ProblemInstance& inst,
                                 const Topology& topo, const AlgoParams& params, std::size_t round,
                                 MessageLedger& ledger) {
  auto propose = [&](std::size_t, AdmmNodeState& s, const Vector& weights) {
    detail::admm_ridge_update(s);
    return detail::admm_z_proposal(s, weights, params);
  };
  auto finalize = [](std::size_t, AdmmNodeState& s, const Vector& z) { s.mu += s.ridge - z; };
  return detail::synchronous_round(states, inst, topo, params, round, ledger, propose, finalize);
}

/// Same messaging, switch cap and stopping as run_djist. Use
/// AlgoParams::admm_defaults() for the reference setting.
inline RunResult run_djadmm(const ProblemInstance& inst, const Topology& topo, const AlgoParams& params,
                            const RoundObserver<AdmmNodeState>& observer = {}) {
  detail::check_run_inputs(inst, topo, params, /*uses_tau=*/false);
  auto states = init_admm_states(inst, topo, params);
  auto one_round = [&](std::size_t round, MessageLedger& ledger) {
    return djadmm_round(states, inst, topo, params, round, ledger);
  };
  return detail::drive(states, inst, topo, params, one_round, observer);
}

}  // namespace jsnet
