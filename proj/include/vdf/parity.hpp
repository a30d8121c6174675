#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "vdf/graph.hpp"

namespace vdf {

// An explored edge with its constraint: parity 1 asks for different colors
// ("neq"), parity 0 for equal colors ("eq").
struct ParityEdge {
  Vertex u = 0;
  Vertex v = 0;
  std::uint8_t parity = 1;

  friend bool operator==(const ParityEdge&, const ParityEdge&) = default;
};

// Odd-parity cycle: consecutive edges share endpoints and the first edge's
// u equals the last edge's v.
using ParityWitness = std::vector<ParityEdge>;

struct ParityCheck {
  bool consistent = true;
  ParityWitness witness;
};

/// Incremental store of explored edges with a parity union-find.
///
/// Conflicts are detected by the union-find. Witnesses are read off a
/// spanning forest of the accepted edges (union-find parent links are not
/// graph edges), closing the tree path between the endpoints of the
/// conflicting edge.
class ExploredSubgraph {
 public:
  /// Adds an edge; returns a witness the first time the edge set becomes
  /// inconsistent. Once inconsistent, later additions are only recorded.
  std::optional<ParityWitness> add(Vertex a, Vertex b, std::uint8_t parity) {
    const ParityEdge e{a, b, static_cast<std::uint8_t>(parity & 1U)};
    edges_.push_back(e);
    if (!consistent_) return std::nullopt;
    const auto ia = index_of(a);
    const auto ib = index_of(b);
    const auto [ra, pa] = find(ia);
    const auto [rb, pb] = find(ib);
    if (ra == rb) {
      if ((pa ^ pb) == e.parity) return std::nullopt;
      consistent_ = false;
      witness_ = tree_path(ia, ib);
      witness_.push_back({b, a, e.parity});
      return witness_;
    }
    unite(ra, rb, pa ^ pb ^ e.parity);
    forest_[ia].push_back({ib, e.parity});
    forest_[ib].push_back({ia, e.parity});
    return std::nullopt;
  }

  bool consistent() const { return consistent_; }
  const ParityWitness& witness() const { return witness_; }
  std::span<const ParityEdge> edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t vertex_count() const { return ids_.size(); }

 private:
  struct ForestLink {
    std::uint32_t to;
    std::uint8_t parity;
  };

  std::uint32_t index_of(Vertex v) {
    const auto [it, inserted] = index_.try_emplace(v, static_cast<std::uint32_t>(ids_.size()));
    if (inserted) {
      ids_.push_back(v);
      parent_.push_back(it->second);
      rank_.push_back(0);
      to_parent_.push_back(0);
      forest_.emplace_back();
    }
    return it->second;
  }

  // Returns (root, parity of x relative to root), compressing the path.
  std::pair<std::uint32_t, std::uint8_t> find(std::uint32_t x) {
    std::uint32_t root = x;
    std::uint8_t acc = 0;
    while (parent_[root] != root) {
      acc ^= to_parent_[root];
      root = parent_[root];
    }
    const std::uint8_t result = acc;
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      const std::uint8_t next_acc = acc ^ to_parent_[x];
      parent_[x] = root;
      to_parent_[x] = acc;
      x = next;
      acc = next_acc;
    }
    return {root, result};
  }

  void unite(std::uint32_t ra, std::uint32_t rb, std::uint8_t parity) {
    if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    to_parent_[rb] = parity;
    if (rank_[ra] == rank_[rb]) ++rank_[ra];
  }

  // Forest path from `from` to `to` as oriented parity edges.
  ParityWitness tree_path(std::uint32_t from, std::uint32_t to) const {
    std::unordered_map<std::uint32_t, std::pair<std::uint32_t, std::uint8_t>> came_from;
    std::vector<std::uint32_t> queue{from};
    came_from.emplace(from, std::make_pair(from, std::uint8_t{0}));
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto x = queue[head];
      if (x == to) break;
      for (const auto& link : forest_[x]) {
        if (came_from.try_emplace(link.to, x, link.parity).second) queue.push_back(link.to);
      }
    }
    ParityWitness path;
    for (auto x = to; x != from;) {
      const auto [prev, parity] = came_from.at(x);
      path.push_back({ids_[prev], ids_[x], parity});
      x = prev;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  std::vector<ParityEdge> edges_;
  std::unordered_map<Vertex, std::uint32_t> index_;
  std::vector<Vertex> ids_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::vector<std::uint8_t> to_parent_;
  std::vector<std::vector<ForestLink>> forest_;
  ParityWitness witness_;
  bool consistent_ = true;
};

/// Decides whether some chi : V -> {0,1} satisfies chi(u) xor chi(v) = parity
/// for every edge; otherwise returns an odd-parity cycle made of input edges.
inline ParityCheck check_parity_consistency(std::span<const ParityEdge> edges) {
  ExploredSubgraph sub;
  for (const auto& e : edges) {
    if (auto w = sub.add(e.u, e.v, e.parity)) return {false, std::move(*w)};
  }
  return {};
}

/// True when `cycle` is a closed walk with odd total parity.
inline bool is_odd_parity_cycle(std::span<const ParityEdge> cycle) {
  if (cycle.empty()) return false;
  unsigned sum = 0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const auto& next = cycle[(i + 1) % cycle.size()];
    if (cycle[i].v != next.u) return false;
    sum += cycle[i].parity;
  }
  return sum % 2 == 1;
}

}  // namespace vdf
