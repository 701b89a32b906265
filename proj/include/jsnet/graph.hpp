#pragma once

// Undirected network topologies. Neighbor lists exclude the node itself;
// degrees follow the self-inclusive convention d_v = |neighbors(v)| + 1.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jsnet/error.hpp"
#include "jsnet/rng.hpp"

namespace jsnet {

class Topology {
 public:
  Topology() = default;

  /// Takes per-node neighbor lists; validates symmetry, absence of self
  /// loops and duplicates, and connectivity.
  explicit Topology(std::vector<std::vector<std::size_t>> adjacency) : adj_(std::move(adjacency)) {
    if (adj_.empty()) throw InvalidDimension("topology needs at least one node");
    for (auto& list : adj_) std::sort(list.begin(), list.end());
    for (std::size_t v = 0; v < adj_.size(); ++v) {
      const auto& list = adj_[v];
      if (std::adjacent_find(list.begin(), list.end()) != list.end())
        throw InvalidParameter("duplicate edge at node " + std::to_string(v));
      for (auto u : list) {
        if (u >= adj_.size()) throw InvalidDimension("neighbor index out of range");
        if (u == v) throw InvalidParameter("self loop at node " + std::to_string(v));
        if (!std::binary_search(adj_[u].begin(), adj_[u].end(), v))
          throw InvalidParameter("asymmetric edge " + std::to_string(v) + "-" + std::to_string(u));
      }
    }
    if (!connected(adj_)) throw Infeasible("topology is not connected");
  }

  std::size_t size() const { return adj_.size(); }

  std::span<const std::size_t> neighbors(std::size_t v) const {
    check(v);
    return adj_[v];
  }

  /// Self-inclusive degree.
  std::size_t degree(std::size_t v) const {
    check(v);
    return adj_[v].size() + 1;
  }

  /// Links leaving v, i.e. degree(v) - 1.
  std::size_t fanout(std::size_t v) const { return degree(v) - 1; }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (const auto& list : adj_) twice += list.size();
    return twice / 2;
  }

  bool adjacent(std::size_t u, std::size_t v) const {
    check(u);
    check(v);
    return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
  }

  /// Position of u inside neighbors(v), or size() if not adjacent.
  std::size_t slot_of(std::size_t v, std::size_t u) const {
    const auto& list = adj_[v];
    auto it = std::lower_bound(list.begin(), list.end(), u);
    if (it == list.end() || *it != u) return list.size();
    return static_cast<std::size_t>(it - list.begin());
  }

  bool is_regular() const {
    return std::all_of(adj_.begin(), adj_.end(),
                       [&](const auto& l) { return l.size() == adj_.front().size(); });
  }

  bool is_complete() const {
    return std::all_of(adj_.begin(), adj_.end(),
                       [&](const auto& l) { return l.size() + 1 == adj_.size(); });
  }

  friend bool operator==(const Topology&, const Topology&) = default;

  static bool connected(const std::vector<std::vector<std::size_t>>& adj) {
    if (adj.empty()) return false;
    std::vector<char> seen(adj.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto u : adj[v]) {
        if (u < adj.size() && !seen[u]) {
          seen[u] = 1;
          ++count;
          stack.push_back(u);
        }
      }
    }
    return count == adj.size();
  }

 private:
  void check(std::size_t v) const {
    if (v >= adj_.size())
      throw InvalidDimension("node index " + std::to_string(v) + " out of range");
  }

  std::vector<std::vector<std::size_t>> adj_;
};

/// One isolated node; the only connected topology on V = 1.
inline Topology single_node() { return Topology(std::vector<std::vector<std::size_t>>(1)); }

inline Topology complete(std::size_t nodes) {
  if (nodes < 2) throw InvalidDimension("complete graph needs V >= 2");
  std::vector<std::vector<std::size_t>> adj(nodes);
  for (std::size_t v = 0; v < nodes; ++v)
    for (std::size_t u = 0; u < nodes; ++u)
      if (u != v) adj[v].push_back(u);
  return Topology(std::move(adj));
}

/// Cycle 0-1-...-(V-1)-0; every node has degree 3 counting itself.
inline Topology ring(std::size_t nodes) {
  if (nodes < 3) throw InvalidDimension("ring needs V >= 3");
  std::vector<std::vector<std::size_t>> adj(nodes);
  for (std::size_t v = 0; v < nodes; ++v) {
    adj[v].push_back((v + 1) % nodes);
    adj[v].push_back((v + nodes - 1) % nodes);
  }
  return Topology(std::move(adj));
}

/// Random graph where each node has d - 1 neighbors (self-inclusive degree d).
/// Pairing model: shuffle stubs, pair consecutive ones, reject self loops,
/// multi-edges and disconnected results; at most 1000 attempts.
inline Topology random_regular(std::size_t nodes, std::size_t d, std::uint64_t seed) {
  if (nodes == 0 || d == 0) throw InvalidDimension("random_regular: V and d must be >= 1");
  const std::size_t per_node = d - 1;
  if (per_node >= nodes) throw Infeasible("random_regular: d - 1 must be < V");
  if ((per_node * nodes) % 2 != 0)
    throw Infeasible("random_regular: (d - 1) * V must be even");
  if (per_node == nodes - 1) return nodes == 1 ? single_node() : complete(nodes);

  Rng rng(derive_seed(seed, {0x7e6}));
  std::vector<std::size_t> stubs;
  stubs.reserve(per_node * nodes);
  for (std::size_t attempt = 0; attempt < 1000; ++attempt) {
    stubs.clear();
    for (std::size_t v = 0; v < nodes; ++v) stubs.insert(stubs.end(), per_node, v);
    rng.shuffle(stubs);
    std::vector<std::vector<std::size_t>> adj(nodes);
    bool ok = true;
    for (std::size_t e = 0; ok && e + 1 < stubs.size(); e += 2) {
      const auto a = stubs[e];
      const auto b = stubs[e + 1];
      if (a == b || std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end()) {
        ok = false;
        break;
      }
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    if (ok && Topology::connected(adj)) return Topology(std::move(adj));
  }
  throw Infeasible("random_regular: no simple connected pairing after 1000 attempts");
}

/// neighbors(v) together with v itself, sorted.
inline std::vector<std::size_t> neighborhood_inclusive(const Topology& topo, std::size_t v) {
  auto nb = topo.neighbors(v);
  std::vector<std::size_t> out(nb.begin(), nb.end());
  out.insert(std::lower_bound(out.begin(), out.end(), v), v);
  return out;
}

}  // namespace jsnet
