#pragma once

// Scalar penalty and shrinkage primitives.

#include <algorithm>
#include <cmath>

#include "jsnet/error.hpp"

namespace jsnet {

/// MCP penalty: beta*z - z^2/2 on [0, beta), beta^2/2 beyond.
inline double mcp_g(double z, double beta) {
  if (z < 0.0) throw InvalidParameter("mcp_g: argument must be >= 0");
  if (!(beta > 0.0)) throw InvalidParameter("mcp_g: beta must be > 0");
  return z < beta ? beta * z - 0.5 * z * z : 0.5 * beta * beta;
}

/// Reweighting rule [beta - alpha*|x| - mean_indicator]_+, the MCP derivative
/// evaluated at alpha*|x| + mean_indicator.
inline double mcp_weight(double x_abs, double mean_indicator, double alpha, double beta) {
  if (x_abs < 0.0) throw InvalidParameter("mcp_weight: |x| must be >= 0");
  if (mean_indicator < 0.0 || mean_indicator > 1.0)
    throw InvalidParameter("mcp_weight: mean indicator must lie in [0, 1]");
  return std::max(0.0, beta - alpha * x_abs - mean_indicator);
}

/// MCP penalty as a policy object, so functionals can be written against
/// any penalty exposing value() and weight().
struct McpPenalty {
  double beta = 1.1;

  double value(double z) const { return mcp_g(z, beta); }
  double weight(double x_abs, double mean_indicator, double alpha) const {
    return mcp_weight(x_abs, mean_indicator, alpha, beta);
  }
};

inline double soft(double x, double w) {
  const double ax = std::abs(x);
  if (ax <= w) return 0.0;
  return x > 0.0 ? x - w : x + w;
}

/// Soft thresholding with an extra hard dead zone: zero whenever
/// (|x| - w)^2 <= a.
inline double soft_hard(double x, double w, double a) {
  const double ax = std::abs(x);
  if (ax <= w) return 0.0;
  const double excess = ax - w;
  if (excess * excess <= a) return 0.0;
  return x > 0.0 ? x - w : x + w;
}

/// Scalar surrogate whose global minimizer is soft_hard(z, w, a):
///   1/2 (x - z)^2 + w |x| + (a / 2) * [x != 0].
inline double mixed_surrogate(double x, double z, double w, double a) {
  const double d = x - z;
  return 0.5 * d * d + w * std::abs(x) + (x != 0.0 ? 0.5 * a : 0.0);
}

}  // namespace jsnet
