#pragma once

// DJ-IST: distributed reweighted-l1 iterative soft thresholding with
// support-index messaging.
//
// Every round each active node takes a Landweber step, recomputes its MCP
// weights from its own magnitudes and the last support bits received from its
// neighbors, and soft-thresholds. A component that is currently zero may turn
// non-zero at most p times. Whenever a component's indicator flips, its index
// is sent to all neighbors. Messages are delivered at the end of the round,
// so every node reads round-t neighbor bits while computing round t+1.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "jsnet/core_model.hpp"
#include "jsnet/functional.hpp"
#include "jsnet/graph.hpp"
#include "jsnet/ledger.hpp"
#include "jsnet/metrics.hpp"
#include "jsnet/run_result.hpp"
#include "jsnet/thresholding.hpp"

namespace jsnet {

struct NodeState {
  Vector x;                                // sparsity-carrying estimate
  SupportMask self_bits;                   // indicator(x) at round boundaries
  std::vector<SupportMask> neighbor_bits;  // aligned with Topology::neighbors(v)
  std::vector<unsigned> switches;          // zero -> non-zero transitions per component
  bool stopped = false;  // last step below epsilon (frozen under StopScope::PerNode)
};

struct SupportMessage {
  std::size_t sender = 0;
  std::size_t index = 0;
  std::size_t round = 0;
};

struct RoundOutcome {
  std::vector<SupportMessage> messages;
  std::size_t assumption_violations = 0;
};

/// Called with round 0 after initialization and after every completed round.
template <class State>
using RoundObserver = std::function<void(std::size_t round, const std::vector<State>&)>;

namespace detail {

inline void init_exchange(NodeState& s, const Topology& topo, std::size_t v, std::size_t n) {
  s.self_bits = indicator(s.x);
  // every component starts active on the wire
  s.neighbor_bits.assign(topo.neighbors(v).size(), SupportMask(n, 1));
  s.switches.assign(n, 0);
  s.stopped = false;
}

/// Self-inclusive mean indicator for every component of node v, with the
/// node's own term taken from its current iterate.
inline void mean_indicators(const NodeState& s, double degree, Vector& out) {
  const auto n = s.self_bits.size();
  out.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    unsigned active = s.x[static_cast<Eigen::Index>(i)] != 0.0;
    for (const auto& bits : s.neighbor_bits) active += bits[i];
    out[static_cast<Eigen::Index>(i)] = active / degree;
  }
}

inline double step_size(const Vector& a, const Vector& b, StopRule rule) {
  return rule == StopRule::MaxAbs ? (a - b).lpNorm<Eigen::Infinity>() : (a - b).norm();
}

/// Applies the switch cap to a proposed iterate, updates counters, and
/// returns the indices whose indicator changed.
inline std::vector<std::size_t> commit(NodeState& s, Vector& proposed, unsigned p) {
  std::vector<std::size_t> flipped;
  for (Eigen::Index i = 0; i < proposed.size(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (s.x[i] == 0.0) {
      if (s.switches[ui] >= p) proposed[i] = 0.0;
      if (proposed[i] != 0.0) ++s.switches[ui];
    }
    if ((proposed[i] != 0.0) != (s.x[i] != 0.0)) flipped.push_back(ui);
  }
  return flipped;
}

/// End-of-round barrier: update senders' own bits, deliver to neighbors and
/// charge the ledger.
template <class State>
void deliver(std::vector<State>& states, const Topology& topo, const std::vector<SupportMessage>& messages,
             std::size_t n, MessageLedger& ledger) {
  for (const auto& msg : messages) {
    auto& sender = states[msg.sender];
    const std::uint8_t bit = sender.x[static_cast<Eigen::Index>(msg.index)] != 0.0;
    sender.self_bits[msg.index] = bit;
    for (auto u : topo.neighbors(msg.sender)) {
      auto& receiver = states[u];
      receiver.neighbor_bits[topo.slot_of(u, msg.sender)][msg.index] = bit;
    }
    record_support_index(ledger, msg.round, msg.sender, topo.fanout(msg.sender), n, msg.index);
  }
}

/// Shared synchronous driver. `propose(v, state, weights)` returns the
/// candidate new sparse iterate; `finalize(v, state, committed)` sees the
/// capped iterate before it replaces state.x.
template <class State, class Propose, class Finalize>
RoundOutcome synchronous_round(std::vector<State>& states, const ProblemInstance& inst, const Topology& topo,
                               const AlgoParams& params, std::size_t round, MessageLedger& ledger,
                               Propose&& propose, Finalize&& finalize) {
  RoundOutcome out;
  Vector mean;
  Vector weights(static_cast<Eigen::Index>(inst.n));
  for (std::size_t v = 0; v < states.size(); ++v) {
    auto& s = states[v];
    if (s.stopped && params.stop_scope == StopScope::PerNode) continue;
    mean_indicators(s, static_cast<double>(topo.degree(v)), mean);
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      const double arg = params.alpha * std::abs(s.x[i]) + mean[i];
      if (arg >= params.beta) ++out.assumption_violations;
      weights[i] = std::max(0.0, params.beta - arg);
    }
    Vector next = propose(v, s, weights);
    const auto flipped = commit(s, next, params.p);
    finalize(v, s, next);
    const double delta = step_size(next, s.x, params.stop_rule);
    s.x = std::move(next);
    s.stopped = delta < params.epsilon;
    for (auto i : flipped) out.messages.push_back({v, i, round});
  }
  deliver(states, topo, out.messages, inst.n, ledger);
  return out;
}

inline void check_run_inputs(const ProblemInstance& inst, const Topology& topo, const AlgoParams& params,
                             bool uses_tau = true) {
  params.validate();
  if (topo.size() != inst.nodes) throw InvalidDimension("topology size differs from V");
  if (uses_tau && params.check_tau) {
    const double bound = max_admissible_tau(inst);
    if (!(params.tau < bound))
      throw InvalidParameter("tau = " + std::to_string(params.tau) +
                             " violates tau < min_v ||A_v||^-2 = " + std::to_string(bound));
  }
}

template <class State, class RoundFn>
RunResult drive(std::vector<State>& states, const ProblemInstance& inst, const Topology& topo,
                const AlgoParams& params, RoundFn&& one_round, const RoundObserver<State>& observer) {
  RunResult result;
  result.ledger = MessageLedger(inst.nodes);
  if (observer) observer(0, states);
  std::size_t last_change = 0;
  std::size_t round = 0;
  bool all_stopped = false;
  while (!all_stopped && round < params.max_iters) {
    ++round;
    auto outcome = one_round(round, result.ledger);
    result.assumption_violations += outcome.assumption_violations;
    if (!outcome.messages.empty()) last_change = round;
    if (observer) observer(round, states);
    all_stopped = std::all_of(states.begin(), states.end(), [](const auto& s) { return s.stopped; });
  }
  result.rounds = round;
  result.converged = all_stopped;
  for (const auto& s : states) {
    result.estimates.push_back(s.x);
    result.supports.push_back(s.self_bits);
    for (auto c : s.switches) result.max_switches = std::max(result.max_switches, c);
  }
  result.stabilization =
      describe_supports(result.estimates, all_stopped ? std::optional<std::size_t>(last_change) : std::nullopt);
  return result;
}

}  // namespace detail

/// x_v(0) = A_v^T y_v, all neighbor bits set, counters cleared.
inline std::vector<NodeState> init_states(const ProblemInstance& inst, const Topology& topo) {
  if (topo.size() != inst.nodes) throw InvalidDimension("topology size differs from V");
  std::vector<NodeState> states(inst.nodes);
  for (std::size_t v = 0; v < inst.nodes; ++v) {
    states[v].x = inst.A[v].transpose() * inst.y[v];
    detail::init_exchange(states[v], topo, v, inst.n);
  }
  return states;
}

/// One synchronous DJ-IST round over all active nodes.
inline RoundOutcome djist_round(std::vector<NodeState>& states, const ProblemInstance& inst,
                                const Topology& topo, const AlgoParams& params, std::size_t round,
                                MessageLedger& ledger) {
  Vector residual;
  auto propose = [&](std::size_t v, const NodeState& s, const Vector& weights) {
    residual.noalias() = inst.y[v] - inst.A[v] * s.x;
    Vector z = s.x;
    z.noalias() += params.tau * (inst.A[v].transpose() * residual);
    const double scale = params.lambda * params.alpha;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = soft(z[i], scale * weights[i]);
    return z;
  };
  auto finalize = [](std::size_t, NodeState&, const Vector&) {};
  return detail::synchronous_round(states, inst, topo, params, round, ledger, propose, finalize);
}

/// Runs DJ-IST until every node's step falls below epsilon or max_iters
/// rounds elapse (then `converged` is false).
inline RunResult run_djist(const ProblemInstance& inst, const Topology& topo, const AlgoParams& params,
                           const RoundObserver<NodeState>& observer = {}) {
  detail::check_run_inputs(inst, topo, params);
  auto states = init_states(inst, topo);
  auto one_round = [&](std::size_t round, MessageLedger& ledger) {
    return djist_round(states, inst, topo, params, round, ledger);
  };
  return detail::drive(states, inst, topo, params, one_round, observer);
}

/// Limit of the non-zero components once the support and signs are frozen
/// and every weight stays positive:
///   (tau A_S^T A_S - lambda alpha^2 I) x = tau A_S^T y - lambda alpha s (beta - m_S)
/// where m_S is the self-inclusive mean indicator on the support.
template <class Derived>
Vector fixed_point(const Eigen::MatrixBase<Derived>& A, const Vector& y, const std::vector<std::size_t>& support,
                   const std::vector<int>& signs, const Vector& mean_on_support, const AlgoParams& params) {
  const auto k = support.size();
  if (signs.size() != k || static_cast<std::size_t>(mean_on_support.size()) != k)
    throw InvalidDimension("fixed_point: support, signs and mean indicators differ in length");
  if (k > static_cast<std::size_t>(A.rows()))
    throw InvalidDimension("fixed_point: support larger than m");
  if (A.rows() != y.size()) throw InvalidDimension("fixed_point: y length differs from m");
  const Eigen::MatrixXd As = restrict_columns(A, support);
  const auto ks = static_cast<Eigen::Index>(k);
  const double shrink = params.lambda * params.alpha;
  Eigen::MatrixXd system = params.tau * (As.transpose() * As);
  system.diagonal().array() -= shrink * params.alpha;
  Vector rhs = params.tau * (As.transpose() * y);
  for (Eigen::Index j = 0; j < ks; ++j)
    rhs[j] -= shrink * signs[static_cast<std::size_t>(j)] * (params.beta - mean_on_support[j]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw SingularSystem("fixed_point: system matrix is singular");
  return lu.solve(rhs);
}

/// Post-stabilization map Gamma(x) = M x + c on the support, with
///   M = lambda alpha^2 D + I - tau A_S^T A_S,
///   c = -lambda alpha D s (beta - m_S) + tau A_S^T y,
/// where D flags components whose weight is positive.
template <class Derived>
Vector gamma_step(const Vector& x, const Eigen::MatrixBase<Derived>& A_support, const Vector& y,
                  const std::vector<int>& signs, const Vector& mean_on_support, const AlgoParams& params,
                  const std::vector<bool>& positive_weight) {
  const auto k = static_cast<std::size_t>(x.size());
  if (static_cast<std::size_t>(A_support.cols()) != k || signs.size() != k ||
      static_cast<std::size_t>(mean_on_support.size()) != k || positive_weight.size() != k ||
      A_support.rows() != y.size())
    throw InvalidDimension("gamma_step: dimension mismatch");
  const double shrink = params.lambda * params.alpha;
  Vector out = x + params.tau * (A_support.transpose() * (y - A_support * x));
  for (std::size_t j = 0; j < k; ++j) {
    if (!positive_weight[j]) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    out[jj] += shrink * params.alpha * x[jj] - shrink * signs[j] * (params.beta - mean_on_support[jj]);
  }
  return out;
}

/// ||(1 + lambda alpha^2) I - tau A_S^T A_S||_2; below 1 means the
/// post-stabilization map contracts.
template <class Derived>
double contraction_norm(const Eigen::MatrixBase<Derived>& A_support, const AlgoParams& params) {
  Eigen::MatrixXd M = -params.tau * (A_support.transpose() * A_support);
  M.diagonal().array() += 1.0 + params.lambda * params.alpha * params.alpha;
  return std::sqrt(spectral_norm_sq(M));
}

}  // namespace jsnet
