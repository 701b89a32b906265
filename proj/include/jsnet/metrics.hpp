#pragma once

// Support and estimation quality: ASE, PESR, RSE.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "jsnet/core_model.hpp"

namespace jsnet {

/// Binary support indicator, one byte per component.
using SupportMask = std::vector<std::uint8_t>;

inline SupportMask indicator(const Vector& x) {
  SupportMask mask(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) mask[static_cast<std::size_t>(i)] = x[i] != 0.0;
  return mask;
}

inline SupportMask mask_from_indices(std::size_t n, const std::vector<std::size_t>& indices) {
  SupportMask mask(n, 0);
  for (auto i : indices) {
    if (i >= n) throw InvalidDimension("support index out of range");
    mask[i] = 1;
  }
  return mask;
}

inline std::vector<std::size_t> indices_of(const SupportMask& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(i);
  return out;
}

namespace detail {

inline void check_supports(const SupportMask& truth, const std::vector<SupportMask>& estimates) {
  if (estimates.empty()) throw InvalidDimension("no support estimates");
  for (const auto& e : estimates)
    if (e.size() != truth.size()) throw InvalidDimension("support estimate length differs from n");
}

}  // namespace detail

/// Mismatched positions over all nodes, divided by n V.
inline double ase(const SupportMask& truth, const std::vector<SupportMask>& estimates) {
  detail::check_supports(truth, estimates);
  std::size_t wrong = 0;
  for (const auto& e : estimates)
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += (e[i] != 0) != (truth[i] != 0);
  return static_cast<double>(wrong) / static_cast<double>(truth.size() * estimates.size());
}

/// Fraction of nodes whose estimated support equals the truth.
inline double pesr(const SupportMask& truth, const std::vector<SupportMask>& estimates) {
  detail::check_supports(truth, estimates);
  std::size_t exact = 0;
  for (const auto& e : estimates) {
    bool same = true;
    for (std::size_t i = 0; same && i < truth.size(); ++i) same = (e[i] != 0) == (truth[i] != 0);
    exact += same;
  }
  return static_cast<double>(exact) / static_cast<double>(estimates.size());
}

/// sum_v ||x*_v - xhat_v||^2 / sum_v ||x*_v||^2.
inline double rse(const std::vector<Vector>& truth, const std::vector<Vector>& estimates) {
  if (truth.size() != estimates.size() || truth.empty())
    throw InvalidDimension("rse: node count mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t v = 0; v < truth.size(); ++v) {
    if (truth[v].size() != estimates[v].size()) throw InvalidDimension("rse: length mismatch");
    num += (truth[v] - estimates[v]).squaredNorm();
    den += truth[v].squaredNorm();
  }
  if (den == 0.0) throw InvalidParameter("rse: all reference signals are zero");
  return num / den;
}

struct MetricReport {
  double ase = 0.0;
  double pesr = 0.0;
  double rse = 0.0;
};

}  // namespace jsnet
