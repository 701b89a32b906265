#pragma once

#include <cstddef>
#include <vector>

#include "jsnet/jsnet.hpp"

namespace testing_support {

using jsnet::Matrix;
using jsnet::Vector;

/// Instance assembled by hand, bypassing the generator's dimension checks.
inline jsnet::ProblemInstance manual_instance(std::vector<Matrix> A, std::vector<Vector> x_star,
                                              std::vector<std::size_t> support) {
  jsnet::ProblemInstance inst;
  inst.nodes = A.size();
  inst.m = static_cast<std::size_t>(A.front().rows());
  inst.n = static_cast<std::size_t>(A.front().cols());
  inst.k = support.size();
  inst.support = std::move(support);
  inst.A = std::move(A);
  inst.x_star = std::move(x_star);
  for (std::size_t v = 0; v < inst.nodes; ++v) inst.y.push_back(inst.A[v] * inst.x_star[v]);
  return inst;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  jsnet::Rng rng(seed);
  Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = rng.normal();
  return a;
}

inline Vector random_vector(std::size_t n, std::uint64_t seed) {
  jsnet::Rng rng(seed);
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  return x;
}

/// y = A x by explicit loops.
inline std::vector<double> naive_matvec(const Matrix& A, const Vector& x) {
  std::vector<double> y(static_cast<std::size_t>(A.rows()), 0.0);
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index c = 0; c < A.cols(); ++c) y[static_cast<std::size_t>(r)] += A(r, c) * x[c];
  return y;
}

/// y = A^T x by explicit loops.
inline std::vector<double> naive_transpose_matvec(const Matrix& A, const Vector& x) {
  std::vector<double> y(static_cast<std::size_t>(A.cols()), 0.0);
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index c = 0; c < A.cols(); ++c) y[static_cast<std::size_t>(c)] += A(r, c) * x[r];
  return y;
}

}  // namespace testing_support
