#pragma once

// Measurement model y_v = A_v x_v + noise for V nodes sharing one support.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "jsnet/error.hpp"
#include "jsnet/rng.hpp"

namespace jsnet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Jointly sparse ensemble: V signals on a common support Ω, one sensing
/// matrix and measurement vector per node. Immutable once generated.
struct ProblemInstance {
  std::size_t n = 0;      // ambient dimension
  std::size_t m = 0;      // measurements per node
  std::size_t k = 0;      // sparsity
  std::size_t nodes = 0;  // V
  std::vector<std::size_t> support;  // sorted, 0-based
  std::vector<Vector> x_star;
  std::vector<Matrix> A;
  std::vector<Vector> y;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

enum class StopRule { MaxAbs, L2 };

/// Global: the run ends at the first round where every node's step is below
/// epsilon simultaneously; nodes keep iterating until then.
/// PerNode: a node freezes its iterate the first time its own step is below
/// epsilon; the run ends once all nodes are frozen.
enum class StopScope { Global, PerNode };

/// Tuning parameters shared by the iterative algorithms. Defaults are the
/// values used for DJ-IST in the reference experiments.
struct AlgoParams {
  double lambda = 1.0;
  double alpha = 5e-4;
  double beta = 1.1;
  double tau = 2e-2;
  double epsilon = 1e-5;
  unsigned p = 20;           // zero -> non-zero switches allowed per component
  unsigned q = 16;           // bits per quantized real, accounting only
  std::size_t max_iters = 50'000;
  double rho = 1.0;          // ADMM penalty
  StopRule stop_rule = StopRule::MaxAbs;
  StopScope stop_scope = StopScope::Global;
  bool check_tau = true;     // reject tau >= min_v ||A_v||^-2 at run start

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidParameter(std::string(name) + " must be finite and > 0");
    };
    positive(lambda, "lambda");
    positive(alpha, "alpha");
    positive(beta, "beta");
    positive(tau, "tau");
    positive(epsilon, "epsilon");
    positive(rho, "rho");
    if (p == 0) throw InvalidParameter("p must be a positive integer");
    if (q == 0) throw InvalidParameter("q must be a positive integer");
    if (max_iters == 0) throw InvalidParameter("max_iters must be a positive integer");
  }

  /// Parameters used for DJ-ADMM runs (alpha = 5e-3, rho = 1).
  static AlgoParams admm_defaults() {
    AlgoParams p;
    p.alpha = 5e-3;
    p.rho = 1.0;
    return p;
  }
};

/// Strict enforces 1 <= k <= m < n. AllowSparsityAboveM drops k <= m so that
/// measurement sweeps can reach below the sparsity level.
enum class DimensionPolicy { Strict, AllowSparsityAboveM };

namespace detail {

inline void check_dims(std::size_t n, std::size_t m, std::size_t k, std::size_t nodes,
                       DimensionPolicy policy = DimensionPolicy::Strict) {
  if (k == 0) throw InvalidDimension("sparsity k must be >= 1");
  if (k > m && policy == DimensionPolicy::Strict) throw InvalidDimension("sparsity k must not exceed m");
  if (k > n) throw InvalidDimension("sparsity k must not exceed n");
  if (m == 0) throw InvalidDimension("m must be >= 1");
  if (m >= n) throw InvalidDimension("m must be smaller than n");
  if (nodes == 0) throw InvalidDimension("node count V must be >= 1");
}

}  // namespace detail

/// y = A x + g, g ~ N(0, noise_std^2 I). No draws are consumed when noise_std == 0.
template <class Derived>
Vector measure(const Eigen::MatrixBase<Derived>& A, const Vector& x, double noise_std, Rng& rng) {
  if (A.cols() != x.size())
    throw InvalidDimension("measure: A has " + std::to_string(A.cols()) + " columns, x has " +
                           std::to_string(x.size()) + " entries");
  if (noise_std < 0.0) throw InvalidParameter("noise_std must be >= 0");
  Vector y = A * x;
  if (noise_std > 0.0)
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise_std * rng.normal();
  return y;
}

/// Common support drawn uniformly without replacement, standard normal
/// non-zeros drawn independently per node.
inline void generate_signals(ProblemInstance& inst, std::uint64_t signal_seed) {
  Rng rng(derive_seed(signal_seed, {0}));
  std::vector<std::size_t> idx(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) idx[i] = i;
  // partial Fisher-Yates: the first k positions form a uniform k-subset
  for (std::size_t i = 0; i < inst.k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(inst.n - i));
    std::swap(idx[i], idx[j]);
  }
  inst.support.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(inst.k));
  std::sort(inst.support.begin(), inst.support.end());

  inst.x_star.assign(inst.nodes, Vector::Zero(static_cast<Eigen::Index>(inst.n)));
  for (std::size_t v = 0; v < inst.nodes; ++v) {
    Rng node_rng(derive_seed(signal_seed, {1, v}));
    for (auto i : inst.support) inst.x_star[v][static_cast<Eigen::Index>(i)] = node_rng.normal();
  }
}

/// i.i.d. N(0,1) entries divided by sqrt(m); one stream per node.
inline void generate_matrices(ProblemInstance& inst, std::uint64_t matrix_seed) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(inst.m));
  inst.A.clear();
  inst.A.reserve(inst.nodes);
  for (std::size_t v = 0; v < inst.nodes; ++v) {
    Rng rng(derive_seed(matrix_seed, {2, v}));
    Matrix a(static_cast<Eigen::Index>(inst.m), static_cast<Eigen::Index>(inst.n));
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = rng.normal() * scale;
    inst.A.push_back(std::move(a));
  }
}

/// Instance whose signals and matrices come from separate seeds, so that one
/// signal set can be paired with several matrix draws.
inline ProblemInstance generate_instance(std::size_t n, std::size_t m, std::size_t k, std::size_t nodes,
                                         double noise_std, std::uint64_t signal_seed,
                                         std::uint64_t matrix_seed,
                                         DimensionPolicy policy = DimensionPolicy::Strict) {
  detail::check_dims(n, m, k, nodes, policy);
  if (noise_std < 0.0) throw InvalidParameter("noise_std must be >= 0");
  ProblemInstance inst;
  inst.n = n;
  inst.m = m;
  inst.k = k;
  inst.nodes = nodes;
  inst.noise_std = noise_std;
  inst.seed = matrix_seed;
  generate_signals(inst, signal_seed);
  generate_matrices(inst, matrix_seed);
  inst.y.clear();
  for (std::size_t v = 0; v < nodes; ++v) {
    Rng noise_rng(derive_seed(matrix_seed, {3, v}));
    inst.y.push_back(measure(inst.A[v], inst.x_star[v], noise_std, noise_rng));
  }
  return inst;
}

inline ProblemInstance generate_instance(std::size_t n, std::size_t m, std::size_t k, std::size_t nodes,
                                         double noise_std, std::uint64_t seed,
                                         DimensionPolicy policy = DimensionPolicy::Strict) {
  auto inst = generate_instance(n, m, k, nodes, noise_std, derive_seed(seed, {10}),
                                derive_seed(seed, {11}), policy);
  inst.seed = seed;
  return inst;
}

/// ||A||_2^2 by power iteration on A^T A. Stops when the Rayleigh quotient
/// changes by less than 1e-12 relative, or after 10 000 iterations.
template <class Derived>
double spectral_norm_sq(const Eigen::MatrixBase<Derived>& A) {
  if (A.rows() == 0 || A.cols() == 0) throw InvalidDimension("spectral_norm_sq: empty matrix");
  const Eigen::Index n = A.cols();
  // deterministic start with a component along every axis
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 10'000; ++it) {
    Vector w = A.transpose() * (A * v);
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(next - lambda) <= 1e-12 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

/// Columns of A listed in `support`, in order.
template <class Derived>
Eigen::MatrixXd restrict_columns(const Eigen::MatrixBase<Derived>& A,
                                 const std::vector<std::size_t>& support) {
  Eigen::MatrixXd out(A.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (support[j] >= static_cast<std::size_t>(A.cols()))
      throw InvalidDimension("restrict_columns: index out of range");
    out.col(static_cast<Eigen::Index>(j)) = A.col(static_cast<Eigen::Index>(support[j]));
  }
  return out;
}

/// Largest tau admissible for every node: min_v ||A_v||_2^-2.
inline double max_admissible_tau(const ProblemInstance& inst) {
  double bound = std::numeric_limits<double>::infinity();
  for (const auto& a : inst.A) bound = std::min(bound, 1.0 / spectral_norm_sq(a));
  return bound;
}

}  // namespace jsnet
