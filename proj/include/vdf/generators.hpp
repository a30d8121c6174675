#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "vdf/errors.hpp"
#include "vdf/graph.hpp"
#include "vdf/random.hpp"

namespace vdf {

enum class Family { odd_cycle, even_cycle, random_bipartite, random_d_regular, forest,
                    cycles_plus_forest, custom };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::odd_cycle: return "odd_cycle";
    case Family::even_cycle: return "even_cycle";
    case Family::random_bipartite: return "random_bipartite";
    case Family::random_d_regular: return "random_d_regular";
    case Family::forest: return "forest";
    case Family::cycles_plus_forest: return "cycles_plus_forest";
    case Family::custom: return "custom";
  }
  return "custom";
}

inline Family family_from_string(const std::string& name) {
  for (auto f : {Family::odd_cycle, Family::even_cycle, Family::random_bipartite,
                 Family::random_d_regular, Family::forest, Family::cycles_plus_forest,
                 Family::custom}) {
    if (name == to_string(f)) return f;
  }
  throw SpecError("unknown instance family '" + name + "'");
}

struct InstanceFamily {
  Family family = Family::custom;
  std::size_t size = 0;
  unsigned degree_bound = 2;
  std::uint64_t seed = 0;
};

inline BoundedDegreeGraph make_cycle(std::size_t n, unsigned degree_bound = 2) {
  if (n < 3) throw SpecError("cycle needs at least 3 vertices");
  std::vector<Edge> edges;
  for (Vertex v = 1; v <= n; ++v) {
    edges.push_back(Edge::canonical(v, static_cast<Vertex>(v % n + 1)));
  }
  return BoundedDegreeGraph::from_edges(n, degree_bound, edges);
}

inline BoundedDegreeGraph make_path(std::size_t n, unsigned degree_bound = 2) {
  std::vector<Edge> edges;
  for (Vertex v = 1; v < n; ++v) edges.push_back({v, v + 1});
  return BoundedDegreeGraph::from_edges(n, degree_bound, edges);
}

inline BoundedDegreeGraph make_star(std::size_t leaves) {
  std::vector<Edge> edges;
  for (Vertex v = 2; v <= leaves + 1; ++v) edges.push_back({1, v});
  return BoundedDegreeGraph::from_edges(leaves + 1, static_cast<unsigned>(std::max<std::size_t>(leaves, 1)), edges);
}

inline BoundedDegreeGraph make_complete(std::size_t n) {
  std::vector<Edge> edges;
  for (Vertex u = 1; u <= n; ++u) {
    for (Vertex v = u + 1; v <= n; ++v) edges.push_back({u, v});
  }
  return BoundedDegreeGraph::from_edges(n, static_cast<unsigned>(std::max<std::size_t>(n - 1, 1)), edges);
}

inline BoundedDegreeGraph make_petersen() {
  std::vector<Edge> edges;
  for (Vertex i = 0; i < 5; ++i) {
    edges.push_back(Edge::canonical(i + 1, (i + 1) % 5 + 1));          // outer 5-cycle
    edges.push_back(Edge::canonical(i + 1, i + 6));                    // spokes
    edges.push_back(Edge::canonical(i + 6, (i + 2) % 5 + 6));          // inner pentagram
  }
  return BoundedDegreeGraph::from_edges(10, 3, edges);
}

/// Disjoint union; vertices of `b` are shifted past those of `a`.
inline BoundedDegreeGraph disjoint_union(const BoundedDegreeGraph& a, const BoundedDegreeGraph& b) {
  auto edges = a.edges();
  const auto shift = static_cast<Vertex>(a.vertex_count());
  for (auto e : b.edges()) edges.push_back({e.u + shift, e.v + shift});
  return BoundedDegreeGraph::from_edges(a.vertex_count() + b.vertex_count(),
                                        std::max(a.degree_bound(), b.degree_bound()), edges);
}

inline BoundedDegreeGraph repeat_disjoint(const BoundedDegreeGraph& g, std::size_t copies) {
  BoundedDegreeGraph out = g;
  for (std::size_t i = 1; i < copies; ++i) out = disjoint_union(out, g);
  return out;
}

/// Same graph with vertex v renamed perm[v - 1].
inline BoundedDegreeGraph relabel(const BoundedDegreeGraph& g, const std::vector<Vertex>& perm) {
  std::vector<Edge> edges;
  for (auto e : g.edges()) edges.push_back(Edge::canonical(perm[e.u - 1], perm[e.v - 1]));
  return BoundedDegreeGraph::from_edges(g.vertex_count(), g.degree_bound(), edges);
}

namespace detail {

// Random edges between the halves {1..n/2} and {n/2+1..n}, each vertex
// reaching degree at most d.
inline BoundedDegreeGraph random_bipartite(std::size_t n, unsigned d, Rng& rng) {
  const std::size_t left = n / 2;
  const std::size_t right = n - left;
  std::vector<unsigned> deg(n + 1, 0);
  std::set<Edge> edges;
  const std::size_t attempts = 4 * n * d;
  for (std::size_t k = 0; k < attempts && edges.size() < left * d; ++k) {
    const auto u = static_cast<Vertex>(1 + rng.below(left));
    const auto v = static_cast<Vertex>(left + 1 + rng.below(right));
    if (deg[u] >= d || deg[v] >= d) continue;
    if (edges.insert({u, v}).second) {
      ++deg[u];
      ++deg[v];
    }
  }
  const std::vector<Edge> list(edges.begin(), edges.end());
  return BoundedDegreeGraph::from_edges(n, d, list);
}

// Pairing model with restarts until the pairing is simple.
inline BoundedDegreeGraph random_regular(std::size_t n, unsigned d, Rng& rng) {
  std::vector<Vertex> points;
  for (Vertex v = 1; v <= n; ++v) {
    for (unsigned k = 0; k < d; ++k) points.push_back(v);
  }
  for (int round = 0; round < 10000; ++round) {
    for (std::size_t i = points.size(); i > 1; --i) {
      std::swap(points[i - 1], points[rng.below(i)]);
    }
    std::set<Edge> edges;
    bool simple = true;
    for (std::size_t i = 0; i < points.size() && simple; i += 2) {
      if (points[i] == points[i + 1]) simple = false;
      else simple = edges.insert(Edge::canonical(points[i], points[i + 1])).second;
    }
    if (simple) {
      const std::vector<Edge> list(edges.begin(), edges.end());
      return BoundedDegreeGraph::from_edges(n, d, list);
    }
  }
  throw SpecError("could not draw a simple " + std::to_string(d) + "-regular graph");
}

// Random forest: vertex v attaches to a uniformly chosen earlier vertex with
// spare degree, or starts a new tree with probability 1/8.
inline std::vector<Edge> random_forest_edges(std::size_t n, unsigned d, Rng& rng,
                                             Vertex offset = 0) {
  std::vector<Edge> edges;
  std::vector<Vertex> open;  // vertices with degree < d
  std::vector<unsigned> deg(n + 1, 0);
  for (Vertex v = 1; v <= n; ++v) {
    if (!open.empty() && rng.below(8) != 0) {
      const auto pick = rng.below(open.size());
      const Vertex u = open[pick];
      edges.push_back({u + offset, v + offset});
      if (++deg[u] >= d) {
        open[pick] = open.back();
        open.pop_back();
      }
      ++deg[v];
    }
    if (deg[v] < d) open.push_back(v);
  }
  return edges;
}

}  // namespace detail

/// Deterministic for a fixed seed. Throws SpecError for infeasible requests.
inline BoundedDegreeGraph generate_instance(const InstanceFamily& spec) {
  Rng rng(derive_seed(spec.seed, 0x9e1));
  const auto n = spec.size;
  const auto d = spec.degree_bound;
  if (d == 0) throw SpecError("degree bound must be positive");
  switch (spec.family) {
    case Family::odd_cycle:
      if (n < 3 || n % 2 == 0) throw SpecError("odd_cycle needs an odd size >= 3");
      if (d < 2) throw SpecError("cycles need degree bound >= 2");
      return make_cycle(n, d);
    case Family::even_cycle:
      if (n < 4 || n % 2 == 1) throw SpecError("even_cycle needs an even size >= 4");
      if (d < 2) throw SpecError("cycles need degree bound >= 2");
      return make_cycle(n, d);
    case Family::random_bipartite:
      if (n < 2) throw SpecError("random_bipartite needs at least 2 vertices");
      return detail::random_bipartite(n, d, rng);
    case Family::random_d_regular:
      if ((n * d) % 2 == 1) throw SpecError("n * d must be even for a d-regular graph");
      if (d >= n) throw SpecError("d-regular graph needs d < n");
      return detail::random_regular(n, d, rng);
    case Family::forest: {
      if (n < 1) throw SpecError("forest needs at least one vertex");
      const auto edges = detail::random_forest_edges(n, d, rng);
      return BoundedDegreeGraph::from_edges(n, d, edges);
    }
    case Family::cycles_plus_forest: {
      // Triangles on the first 3k vertices, then a forest on the rest.
      if (n < 3 || d < 2) throw SpecError("cycles_plus_forest needs size >= 3 and d >= 2");
      const std::size_t triangles = std::max<std::size_t>(1, n / 6);
      std::vector<Edge> edges;
      for (std::size_t t = 0; t < triangles; ++t) {
        const auto b = static_cast<Vertex>(3 * t);
        edges.push_back({b + 1, b + 2});
        edges.push_back({b + 2, b + 3});
        edges.push_back({b + 1, b + 3});
      }
      const auto rest = n - 3 * triangles;
      const auto forest =
          detail::random_forest_edges(rest, d, rng, static_cast<Vertex>(3 * triangles));
      edges.insert(edges.end(), forest.begin(), forest.end());
      return BoundedDegreeGraph::from_edges(n, d, edges);
    }
    case Family::custom:
      throw SpecError("custom instances are loaded from files, not generated");
  }
  throw SpecError("unknown family");
}

}  // namespace vdf
