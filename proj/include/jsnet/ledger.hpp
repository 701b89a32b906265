#pragma once

// Per-link bit accounting. A message sent to f neighbors costs f times its
// payload, for every algorithm.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "jsnet/error.hpp"

namespace jsnet {

/// Bits needed to send one index in {1..n}: floor(log2 n) + 1.
inline constexpr unsigned index_bits(std::size_t n) {
  if (n == 0) throw InvalidParameter("index_bits: n must be >= 1");
  unsigned bits = 0;
  while (n != 0) {
    ++bits;
    n >>= 1;
  }
  return bits;
}

enum class PayloadKind { SupportIndex, CandidateIndex, CorrelationVector };

inline std::string_view to_string(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::SupportIndex: return "support-index";
    case PayloadKind::CandidateIndex: return "candidate-index";
    case PayloadKind::CorrelationVector: return "correlation-vector";
  }
  return "?";
}

struct LedgerEntry {
  std::size_t round = 0;
  std::size_t sender = 0;
  std::size_t receivers = 0;
  PayloadKind kind = PayloadKind::SupportIndex;
  std::uint64_t bits = 0;
  std::size_t index = 0;  // payload index for index messages, unused otherwise
};

class MessageLedger {
 public:
  MessageLedger() = default;
  explicit MessageLedger(std::size_t nodes) : per_node_(nodes, 0) {}

  void append(const LedgerEntry& e) {
    if (e.sender >= per_node_.size()) per_node_.resize(e.sender + 1, 0);
    entries_.push_back(e);
    per_node_[e.sender] += e.bits;
    total_ += e.bits;
  }

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::uint64_t total_bits() const { return total_; }
  std::uint64_t node_bits(std::size_t v) const { return v < per_node_.size() ? per_node_[v] : 0; }
  std::size_t message_count() const { return entries_.size(); }

  std::size_t count(PayloadKind kind) const {
    std::size_t c = 0;
    for (const auto& e : entries_) c += e.kind == kind ? 1 : 0;
    return c;
  }

  /// Last round carrying any message, 0 when the ledger is empty.
  std::size_t last_round() const {
    std::size_t r = 0;
    for (const auto& e : entries_) r = e.round > r ? e.round : r;
    return r;
  }

  /// CSV with header round,sender,kind,receivers,bits.
  void write_csv(std::ostream& os) const {
    os << "round,sender,kind,receivers,bits\n";
    for (const auto& e : entries_)
      os << e.round << ',' << e.sender << ',' << to_string(e.kind) << ',' << e.receivers << ','
         << e.bits << '\n';
  }

 private:
  std::vector<LedgerEntry> entries_;
  std::vector<std::uint64_t> per_node_;
  std::uint64_t total_ = 0;
};

inline void record_support_index(MessageLedger& ledger, std::size_t round, std::size_t sender,
                                 std::size_t fanout, std::size_t n, std::size_t index = 0) {
  ledger.append({round, sender, fanout, PayloadKind::SupportIndex,
                 static_cast<std::uint64_t>(fanout) * index_bits(n), index});
}

inline void record_candidate_index(MessageLedger& ledger, std::size_t round, std::size_t sender,
                                   std::size_t receivers, std::size_t n, std::size_t index = 0) {
  ledger.append({round, sender, receivers, PayloadKind::CandidateIndex,
                 static_cast<std::uint64_t>(receivers) * index_bits(n), index});
}

inline void record_correlation_vector(MessageLedger& ledger, std::size_t round, std::size_t sender,
                                      std::size_t fanout, std::size_t n, unsigned q) {
  ledger.append({round, sender, fanout, PayloadKind::CorrelationVector,
                 static_cast<std::uint64_t>(fanout) * q * n, 0});
}

enum class Algorithm { DjIst, DjAdmm, DcOmp1, DcOmp2 };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::DjIst: return "djist";
    case Algorithm::DjAdmm: return "djadmm";
    case Algorithm::DcOmp1: return "dcomp1";
    case Algorithm::DcOmp2: return "dcomp2";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "djist") return Algorithm::DjIst;
  if (s == "djadmm") return Algorithm::DjAdmm;
  if (s == "dcomp1") return Algorithm::DcOmp1;
  if (s == "dcomp2") return Algorithm::DcOmp2;
  throw InvalidParameter("unknown algorithm '" + std::string(s) + "'");
}

struct BitRange {
  std::uint64_t min = 0;
  std::uint64_t max = 0;
};

/// Total bits over a run on a d-regular topology (d self-inclusive).
///   DC-OMP 1        V (d-1) r * [ceil(k / floor(d/2)), k]
///   DC-OMP 2        V ((d-1) q n + (V-1) r) * [ceil(k / floor(d/2)), k]
///   DJ-IST/DJ-ADMM  [0, 2 p n V (d-1) r]
inline BitRange analytic_range(Algorithm algo, std::size_t n, std::size_t k, std::size_t nodes,
                               std::size_t d, unsigned q, unsigned p) {
  if (n == 0 || k == 0 || nodes == 0 || d == 0) throw InvalidParameter("analytic_range: zero parameter");
  const std::uint64_t r = index_bits(n);
  const std::uint64_t links = d - 1;
  const std::uint64_t half = d / 2 == 0 ? 1 : d / 2;
  const std::uint64_t min_steps = (k + half - 1) / half;
  switch (algo) {
    case Algorithm::DcOmp1: {
      const std::uint64_t unit = nodes * links * r;
      return {unit * min_steps, unit * k};
    }
    case Algorithm::DcOmp2: {
      const std::uint64_t unit = nodes * (links * q * n + (nodes - 1) * r);
      return {unit * min_steps, unit * k};
    }
    case Algorithm::DjIst:
    case Algorithm::DjAdmm:
      return {0, 2ULL * p * n * nodes * links * r};
  }
  return {};
}

/// Bits of one DC-OMP 2 iteration: V ((d-1) q n + (V-1) r).
inline std::uint64_t dcomp2_iteration_bits(std::size_t n, std::size_t nodes, std::size_t d, unsigned q) {
  return static_cast<std::uint64_t>(nodes) * ((d - 1) * static_cast<std::uint64_t>(q) * n +
                                              (nodes - 1) * static_cast<std::uint64_t>(index_bits(n)));
}

}  // namespace jsnet
