#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "jsnet/functional.hpp"
#include "jsnet/ledger.hpp"
#include "jsnet/metrics.hpp"

namespace jsnet {

struct StabilizationReport {
  /// Round after which no indicator changes; empty if the run did not converge.
  std::optional<std::size_t> t1;
  std::vector<std::vector<std::size_t>> supports;  // per node, sorted indices
  std::vector<std::vector<int>> signs;             // per node, aligned with supports
};

struct RunResult {
  NetworkIterate estimates;
  std::vector<SupportMask> supports;
  std::size_t rounds = 0;
  bool converged = false;
  MessageLedger ledger;
  StabilizationReport stabilization;
  unsigned max_switches = 0;                 // largest zero -> non-zero counter seen
  std::size_t assumption_violations = 0;     // component-rounds with alpha|x| + mean >= beta

  std::uint64_t total_bits() const { return ledger.total_bits(); }
  std::size_t total_messages() const { return ledger.message_count(); }
  std::size_t t1_or(std::size_t fallback) const { return stabilization.t1.value_or(fallback); }

  MetricReport metrics(const ProblemInstance& inst) const {
    const auto truth = mask_from_indices(inst.n, inst.support);
    return {ase(truth, supports), pesr(truth, supports), rse(inst.x_star, estimates)};
  }
};

inline StabilizationReport describe_supports(const NetworkIterate& X, std::optional<std::size_t> t1) {
  StabilizationReport rep;
  rep.t1 = t1;
  for (const auto& x : X) {
    std::vector<std::size_t> idx;
    std::vector<int> sg;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] != 0.0) {
        idx.push_back(static_cast<std::size_t>(i));
        sg.push_back(x[i] > 0.0 ? 1 : -1);
      }
    }
    rep.supports.push_back(std::move(idx));
    rep.signs.push_back(std::move(sg));
  }
  return rep;
}

}  // namespace jsnet
