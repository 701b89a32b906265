#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "support.hpp"

using namespace jsnet;
using testing_support::manual_instance;
using testing_support::naive_transpose_matvec;
using testing_support::random_matrix;
using testing_support::random_vector;

namespace {

AlgoParams small_params(const ProblemInstance& inst) {
  AlgoParams p;
  EXPECT_LT(p.tau, max_admissible_tau(inst));
  return p;
}

struct Trace {
  std::map<std::size_t, std::vector<NodeState>> snapshots;
};

}  // namespace

TEST(InitStates, LandweberStartingPoint) {
  const auto inst = generate_instance(30, 10, 3, 3, 0.0, 4);
  const auto topo = complete(3);
  const auto states = init_states(inst, topo);
  for (std::size_t v = 0; v < 3; ++v) {
    const auto oracle = naive_transpose_matvec(inst.A[v], inst.y[v]);
    for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(states[v].x[static_cast<Eigen::Index>(i)], oracle[i], 1e-12);
    EXPECT_EQ(states[v].neighbor_bits.size(), 2u);
    for (const auto& bits : states[v].neighbor_bits)
      for (auto b : bits) EXPECT_EQ(b, 1);
    for (auto c : states[v].switches) EXPECT_EQ(c, 0u);
  }
}

TEST(InitStates, ZeroMeasurementsAndIdentity) {
  auto inst = manual_instance({Matrix::Identity(3, 3)}, {Vector::Zero(3)}, {});
  EXPECT_EQ(init_states(inst, single_node())[0].x.norm(), 0.0);
  Vector x(3);
  x << 1.0, -2.0, 0.5;
  inst = manual_instance({Matrix::Identity(3, 3)}, {x}, {0, 1, 2});
  EXPECT_TRUE((init_states(inst, single_node())[0].x.array() == x.array()).all());
}

// V = 1, A = I, y = (2, 0), tau = 0.5 evaluated by hand:
// z = x + 0.5 (y - x) = (2, 0); component 1 has mean indicator 1 (its own bit),
// w = beta - alpha*2 - 1; component 2 stays in the dead zone.
TEST(DjistRound, HandEvaluatedScalarRound) {
  Vector x(2);
  x << 2.0, 0.0;
  const auto inst = manual_instance({Matrix::Identity(2, 2)}, {x}, {0});
  AlgoParams p;
  p.tau = 0.5;
  auto states = init_states(inst, single_node());
  MessageLedger ledger(1);
  const auto out = djist_round(states, inst, single_node(), p, 1, ledger);
  const double w = 1.1 - 5e-4 * 2.0 - 1.0;
  EXPECT_NEAR(states[0].x[0], 2.0 - 1.0 * 5e-4 * w, 1e-15);
  EXPECT_EQ(states[0].x[1], 0.0);
  EXPECT_TRUE(out.messages.empty());
  EXPECT_EQ(ledger.total_bits(), 0u);
}

// A saturated estimate (w = 0 on the support) that already fits y exactly is
// a fixed point: nothing moves and nothing is sent.
TEST(DjistRound, StationaryStateSendsNothing) {
  Vector x = Vector::Zero(4);
  x[1] = 5000.0;
  x[3] = -4000.0;
  const auto inst = manual_instance({Matrix::Identity(4, 4), Matrix::Identity(4, 4)}, {x, x}, {1, 3});
  AlgoParams p;
  p.tau = 0.5;
  const auto topo = complete(2);
  auto states = init_states(inst, topo);
  MessageLedger ledger(2);
  for (std::size_t t = 1; t <= 5; ++t) {
    const auto out = djist_round(states, inst, topo, p, t, ledger);
    EXPECT_TRUE(out.messages.empty());
  }
  EXPECT_TRUE((states[0].x.array() == x.array()).all());
  EXPECT_EQ(ledger.message_count(), 0u);
}

// Node 0's component 0 falls into the dead zone in round 1. Node 1 reads the
// old bit during round 1 and the new one from round 2 on.
TEST(DjistRound, NeighborBitsArriveOneRoundLater) {
  Vector small = Vector::Zero(2), large = Vector::Zero(2);
  small[0] = 1e-5;
  large[0] = 1.0;
  const auto inst = manual_instance({Matrix::Identity(2, 2), Matrix::Identity(2, 2)}, {small, large}, {0});
  AlgoParams p;
  p.tau = 0.5;
  const auto topo = complete(2);
  auto states = init_states(inst, topo);
  Vector mean;
  detail::mean_indicators(states[1], 2.0, mean);
  EXPECT_EQ(mean[0], 1.0);

  MessageLedger ledger(2);
  const auto out = djist_round(states, inst, topo, p, 1, ledger);
  ASSERT_EQ(out.messages.size(), 1u);
  EXPECT_EQ(out.messages[0].sender, 0u);
  EXPECT_EQ(out.messages[0].index, 0u);
  EXPECT_EQ(states[0].x[0], 0.0);
  // round 1 used mean 1 at node 1
  EXPECT_NEAR(states[1].x[0], 1.0 - 5e-4 * (1.1 - 5e-4 * 1.0 - 1.0), 1e-15);

  detail::mean_indicators(states[1], 2.0, mean);
  EXPECT_EQ(mean[0], 0.5);
  EXPECT_EQ(ledger.total_bits(), index_bits(2));
}

TEST(RunDjist, IdentityRecoversSupportOnCompleteGraph) {
  std::vector<Matrix> A;
  std::vector<Vector> X;
  for (std::size_t v = 0; v < 3; ++v) {
    A.push_back(Matrix::Identity(4, 4));
    Vector x = random_vector(4, 10 + v);
    X.push_back(x);
  }
  const auto inst = manual_instance(A, X, {0, 1, 2, 3});
  AlgoParams p;
  p.tau = 0.5;
  const auto res = run_djist(inst, complete(3), p);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.metrics(inst).ase, 0.0);
  EXPECT_EQ(res.metrics(inst).pesr, 1.0);
}

TEST(RunDjist, RejectsInadmissibleTau) {
  const auto inst = generate_instance(30, 10, 3, 3, 0.0, 4);
  AlgoParams p;
  p.tau = 1.01 * max_admissible_tau(inst);
  EXPECT_THROW(run_djist(inst, complete(3), p), InvalidParameter);
  p.check_tau = false;
  p.max_iters = 5;
  EXPECT_NO_THROW(run_djist(inst, complete(3), p));
}

TEST(RunDjist, RejectsTopologyOfWrongSize) {
  const auto inst = generate_instance(30, 10, 3, 3, 0.0, 4);
  EXPECT_THROW(run_djist(inst, complete(4), AlgoParams{}), InvalidDimension);
}

TEST(RunDjist, CapReachedIsFlaggedNotThrown) {
  const auto inst = generate_instance(50, 15, 5, 6, 0.0, 3);
  AlgoParams p;
  p.max_iters = 10;
  const auto res = run_djist(inst, random_regular(6, 5, 1), p);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.rounds, 10u);
  EXPECT_FALSE(res.stabilization.t1.has_value());
}

TEST(RunDjist, Deterministic) {
  const auto inst = generate_instance(50, 15, 5, 6, 0.0, 3);
  const auto topo = random_regular(6, 5, 2);
  const auto a = run_djist(inst, topo, AlgoParams{});
  const auto b = run_djist(inst, topo, AlgoParams{});
  EXPECT_EQ(a.rounds, b.rounds);
  EXPECT_EQ(a.total_bits(), b.total_bits());
  for (std::size_t v = 0; v < 6; ++v) EXPECT_TRUE((a.estimates[v].array() == b.estimates[v].array()).all());
}

TEST(RunDjist, StabilizationSwitchesAndLedgerInvariants) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto inst = generate_instance(50, 15, 5, 6, 0.0, 100 + seed);
    const auto topo = random_regular(6, 5, seed);
    const auto p = small_params(inst);
    std::vector<std::vector<SupportMask>> supports;
    std::vector<unsigned> max_counter;
    const auto res = run_djist(inst, topo, p, [&](std::size_t, const std::vector<NodeState>& states) {
      std::vector<SupportMask> s;
      unsigned c = 0;
      for (const auto& st : states) {
        s.push_back(indicator(st.x));
        EXPECT_EQ(s.back(), st.self_bits);
        for (auto k : st.switches) c = std::max(c, k);
      }
      supports.push_back(std::move(s));
      max_counter.push_back(c);
    });
    ASSERT_TRUE(res.converged);
    ASSERT_TRUE(res.stabilization.t1.has_value());
    const auto t1 = *res.stabilization.t1;
    for (const auto& e : res.ledger.entries()) EXPECT_LE(e.round, t1);
    for (std::size_t t = t1; t < supports.size(); ++t) EXPECT_EQ(supports[t], supports[t1]);
    for (auto c : max_counter) EXPECT_LE(c, p.p);
    EXPECT_LE(res.max_switches, p.p);
    EXPECT_EQ(res.assumption_violations, 0u);
    const auto range = analytic_range(Algorithm::DjIst, 50, 5, 6, 5, p.q, p.p);
    EXPECT_LE(res.total_bits(), range.max);
    std::uint64_t sum = 0;
    for (const auto& e : res.ledger.entries()) {
      EXPECT_EQ(e.bits, 4u * index_bits(50));
      EXPECT_EQ(e.kind, PayloadKind::SupportIndex);
      sum += e.bits;
    }
    EXPECT_EQ(sum, res.total_bits());
  }
}

TEST(RunDjist, ObjectiveDoesNotIncreaseAfterLastSwitch) {
  const auto inst = generate_instance(50, 15, 5, 6, 0.0, 77);
  const auto topo = random_regular(6, 5, 77);
  const auto p = small_params(inst);
  std::vector<double> values;
  std::vector<unsigned> switches_total;
  run_djist(inst, topo, p, [&](std::size_t, const std::vector<NodeState>& states) {
    NetworkIterate X;
    unsigned total = 0;
    for (const auto& s : states) {
      X.push_back(s.x);
      for (auto c : s.switches) total += c;
    }
    values.push_back(eval_objective(X, inst, topo, p));
    switches_total.push_back(total);
  });
  std::size_t last_switch = 0;
  for (std::size_t t = 1; t < switches_total.size(); ++t)
    if (switches_total[t] != switches_total[t - 1]) last_switch = t;
  for (std::size_t t = last_switch; t + 1 < values.size(); ++t) EXPECT_LE(values[t + 1], values[t] + 1e-10) << t;
}

TEST(FixedPoint, SmallAlphaIsLeastSquares) {
  const Matrix A = random_matrix(8, 20, 3);
  const Vector y = random_vector(8, 4);
  const std::vector<std::size_t> support{2, 5, 11};
  AlgoParams p;
  p.alpha = 1e-12;
  const Vector fp = fixed_point(A, y, support, {1, -1, 1}, Vector::Constant(3, 0.5), p);
  const Eigen::MatrixXd As = restrict_columns(A, support);
  const Vector ls = (As.transpose() * As).ldlt().solve(As.transpose() * y);
  EXPECT_LT((fp - ls).norm(), 1e-6);
}

TEST(FixedPoint, ScalarClosedForm) {
  const Matrix A = random_matrix(5, 7, 8);
  const Vector y = random_vector(5, 9);
  const AlgoParams p;
  const Eigen::VectorXd a = A.col(4);
  for (int s : {1, -1}) {
    const double mean = 0.6;
    Vector m(1);
    m[0] = mean;
    const Vector fp = fixed_point(A, y, {4}, {s}, m, p);
    const double expected = (p.tau * a.dot(y) - p.lambda * p.alpha * s * (p.beta - mean)) /
                            (p.tau * a.squaredNorm() - p.lambda * p.alpha * p.alpha);
    EXPECT_NEAR(fp[0], expected, 1e-12 * std::abs(expected));
  }
}

TEST(FixedPoint, RejectsBadShapes) {
  const Matrix A = random_matrix(3, 7, 8);
  const Vector y = random_vector(3, 9);
  EXPECT_THROW(fixed_point(A, y, {0, 1, 2, 3}, {1, 1, 1, 1}, Vector::Zero(4), AlgoParams{}), InvalidDimension);
  EXPECT_THROW(fixed_point(A, y, {0, 1}, {1}, Vector::Zero(2), AlgoParams{}), InvalidDimension);
}

TEST(GammaStep, ZeroWeightsGiveGradientStep) {
  const Matrix A = random_matrix(6, 3, 1);
  const Vector y = random_vector(6, 2), x = random_vector(3, 3);
  const AlgoParams p;
  const Vector g = gamma_step(x, A, y, {1, 1, -1}, Vector::Zero(3), p, {false, false, false});
  EXPECT_LT((g - (x + p.tau * A.transpose() * (y - A * x))).norm(), 1e-14);
}

TEST(GammaStep, FixedPointIsInvariant) {
  const Matrix A = random_matrix(10, 30, 5);
  const Vector y = random_vector(10, 6);
  const std::vector<std::size_t> support{1, 4, 9, 20};
  const std::vector<int> signs{1, -1, -1, 1};
  const Vector mean = Vector::Constant(4, 0.8);
  const AlgoParams p;
  const Vector fp = fixed_point(A, y, support, signs, mean, p);
  const Eigen::MatrixXd As = restrict_columns(A, support);
  const Vector g = gamma_step(fp, As, y, signs, mean, p, std::vector<bool>(4, true));
  EXPECT_LE((g - fp).norm(), 1e-10);
}

TEST(GammaStep, ContractsOnRecoveredSupport) {
  const auto inst = generate_instance(100, 22, 10, 1, 0.0, 12);
  const AlgoParams p;
  const double norm = contraction_norm(restrict_columns(inst.A[0], inst.support), p);
  EXPECT_LT(norm, 1.0);
}

// After stabilization every DJ-IST round is the affine map on the support.
TEST(GammaStep, ReplaysConvergedRun) {
  const auto inst = generate_instance(50, 15, 5, 6, 0.0, 101);
  const auto topo = random_regular(6, 5, 1);
  const auto p = small_params(inst);
  const auto first = run_djist(inst, topo, p);
  ASSERT_TRUE(first.stabilization.t1.has_value());
  const auto t1 = *first.stabilization.t1;
  std::map<std::size_t, std::vector<NodeState>> snaps;
  run_djist(inst, topo, p, [&](std::size_t t, const std::vector<NodeState>& s) {
    if (t > t1 && t <= t1 + 6) snaps[t] = s;
  });
  ASSERT_GE(snaps.size(), 2u);
  int checked = 0;
  for (std::size_t t = t1 + 1; snaps.count(t + 1); ++t) {
    for (std::size_t v = 0; v < 6; ++v) {
      const auto& before = snaps[t][v];
      const auto& after = snaps[t + 1][v];
      const auto support = indices_of(before.self_bits);
      if (support.empty()) continue;
      Vector mean_all;
      detail::mean_indicators(before, static_cast<double>(topo.degree(v)), mean_all);
      const auto k = support.size();
      Vector x(static_cast<Eigen::Index>(k)), mean(static_cast<Eigen::Index>(k));
      std::vector<int> signs;
      std::vector<bool> positive;
      for (std::size_t j = 0; j < k; ++j) {
        const auto i = static_cast<Eigen::Index>(support[j]);
        x[static_cast<Eigen::Index>(j)] = before.x[i];
        mean[static_cast<Eigen::Index>(j)] = mean_all[i];
        signs.push_back(before.x[i] > 0 ? 1 : -1);
        positive.push_back(p.beta - p.alpha * std::abs(before.x[i]) - mean_all[i] > 0.0);
      }
      const Vector g = gamma_step(x, restrict_columns(inst.A[v], support), inst.y[v], signs, mean, p, positive);
      for (std::size_t j = 0; j < k; ++j)
        EXPECT_NEAR(after.x[static_cast<Eigen::Index>(support[j])], g[static_cast<Eigen::Index>(j)], 1e-12);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(RunDjist, ConvergedValuesMatchFixedPoint) {
  const auto inst = generate_instance(50, 15, 5, 6, 0.0, 202);
  const auto topo = random_regular(6, 5, 2);
  auto p = small_params(inst);
  p.epsilon = 1e-12;
  std::vector<NodeState> final_states;
  const auto res = run_djist(inst, topo, p, [&](std::size_t, const std::vector<NodeState>& s) { final_states = s; });
  ASSERT_TRUE(res.converged);
  for (std::size_t v = 0; v < 6; ++v) {
    const auto& support = res.stabilization.supports[v];
    if (support.empty() || support.size() > inst.m) continue;
    Vector mean_all;
    detail::mean_indicators(final_states[v], static_cast<double>(topo.degree(v)), mean_all);
    Vector mean(static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j)
      mean[static_cast<Eigen::Index>(j)] = mean_all[static_cast<Eigen::Index>(support[j])];
    const Vector fp = fixed_point(inst.A[v], inst.y[v], support, res.stabilization.signs[v], mean, p);
    for (std::size_t j = 0; j < support.size(); ++j) {
      const double got = res.estimates[v][static_cast<Eigen::Index>(support[j])];
      EXPECT_NEAR(got, fp[static_cast<Eigen::Index>(j)], 1e-6 * std::abs(fp[static_cast<Eigen::Index>(j)]));
    }
  }
}

TEST(RunDjist, FarBelowThresholdMissesSupport) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    const auto inst = generate_instance(100, 4, 10, 10, 0.0, seed, DimensionPolicy::AllowSparsityAboveM);
    AlgoParams p;
    p.check_tau = false;
    total += run_djist(inst, random_regular(10, 5, seed), p).metrics(inst).ase;
  }
  EXPECT_GT(total / 2.0, 0.05);
}

TEST(RunDjist, PerNodeScopeFreezesStoppedNodes) {
  const auto inst = generate_instance(50, 15, 5, 6, 0.0, 5);
  const auto topo = random_regular(6, 5, 5);
  auto p = small_params(inst);
  p.stop_scope = StopScope::PerNode;
  std::vector<Vector> frozen(6);
  std::vector<bool> was_stopped(6, false);
  const auto res = run_djist(inst, topo, p, [&](std::size_t, const std::vector<NodeState>& s) {
    for (std::size_t v = 0; v < 6; ++v) {
      if (was_stopped[v]) EXPECT_TRUE((s[v].x.array() == frozen[v].array()).all());
      if (s[v].stopped && !was_stopped[v]) {
        was_stopped[v] = true;
        frozen[v] = s[v].x;
      }
    }
  });
  EXPECT_TRUE(res.converged);
}
