#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vdf/distribution.hpp"
#include "vdf/errors.hpp"
#include "vdf/graph.hpp"
#include "vdf/parity.hpp"
#include "vdf/random.hpp"
#include "vdf/walk_tester.hpp"

namespace vdf {

// Sums of edge weights are accumulated in binary128. Edge weights are
// doubles within a bounded exponent range, so sums over corpus-sized edge
// sets are exact and distances from different methods compare exactly.
using ExactSum = __float128;

/// Weight of {u, v} under D: 2 (D(u) + D(v)) / d.
inline double edge_weight(const BoundedDegreeGraph& g, const VertexDistribution& dist, Edge e) {
  return 2.0 * (dist.probability(e.u) + dist.probability(e.v)) / g.degree_bound();
}

inline double removed_weight(const BoundedDegreeGraph& g, const VertexDistribution& dist,
                             std::span<const Edge> removed) {
  std::vector<Edge> sorted(removed.begin(), removed.end());
  std::sort(sorted.begin(), sorted.end());
  ExactSum acc = 0;
  for (const Edge& e : sorted) acc += edge_weight(g, dist, e);
  return static_cast<double>(acc);
}

inline double total_edge_weight(const BoundedDegreeGraph& g, const VertexDistribution& dist) {
  const auto edges = g.edges();
  return removed_weight(g, dist, edges);
}

enum class DistanceMethod { bruteforce, exact_forest, exhaustive_subset };

inline const char* to_string(DistanceMethod m) {
  switch (m) {
    case DistanceMethod::bruteforce: return "bruteforce";
    case DistanceMethod::exact_forest: return "exact-forest";
    case DistanceMethod::exhaustive_subset: return "exhaustive-subset";
  }
  return "unknown";
}

struct DistanceReport {
  double distance = 0.0;
  std::vector<Edge> removed;
  DistanceMethod method = DistanceMethod::bruteforce;
};

/// Edge labels aligned with g.edges(): 1 = neq, 0 = eq.
using EdgeParities = std::vector<std::uint8_t>;

inline EdgeParities all_neq_labels(const BoundedDegreeGraph& g) {
  return EdgeParities(g.edge_count(), 1);
}

inline EdgeParities labels_from(const BoundedDegreeGraph& g, const ParityOracle& parity) {
  EdgeParities out;
  for (auto e : g.edges()) out.push_back(parity(e.u, e.v));
  return out;
}

/// Parses "u v eq|neq" lines. Edges not listed default to neq.
inline EdgeParities load_labels(const BoundedDegreeGraph& g, std::string_view text) {
  const auto edges = g.edges();
  EdgeParities out(edges.size(), 1);
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = detail::trim_ws(raw);
    if (line.empty() || line.front() == '#') return;
    const auto parts = detail::tokens(line);
    if (parts.size() != 3) throw ParseError(line_no, "expected \"u v eq|neq\"");
    const auto u = detail::parse_number<Vertex>(parts[0]);
    const auto v = detail::parse_number<Vertex>(parts[1]);
    if (!u || !v) throw ParseError(line_no, "bad vertex id");
    const auto it = std::lower_bound(edges.begin(), edges.end(), Edge::canonical(*u, *v));
    if (it == edges.end() || *it != Edge::canonical(*u, *v)) {
      throw ParseError(line_no, "not an edge of the graph");
    }
    if (parts[2] == "eq") out[it - edges.begin()] = 0;
    else if (parts[2] == "neq") out[it - edges.begin()] = 1;
    else throw ParseError(line_no, "label must be eq or neq");
  });
  return out;
}

namespace detail {

struct Component {
  std::vector<Vertex> vertices;
  std::vector<std::size_t> edge_ids;  // indices into g.edges()
};

inline std::vector<Component> components(const BoundedDegreeGraph& g, std::span<const Edge> edges) {
  std::vector<std::uint32_t> comp(g.vertex_count() + 1, ~0U);
  std::vector<Component> out;
  for (Vertex s = 1; s <= g.vertex_count(); ++s) {
    if (comp[s] != ~0U || g.degree(s) == 0) continue;
    const auto id = static_cast<std::uint32_t>(out.size());
    out.emplace_back();
    std::vector<Vertex> stack{s};
    comp[s] = id;
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      out[id].vertices.push_back(v);
      for (Vertex u : g.neighbors(v)) {
        if (comp[u] == ~0U) {
          comp[u] = id;
          stack.push_back(u);
        }
      }
    }
    std::sort(out[id].vertices.begin(), out[id].vertices.end());
  }
  for (std::size_t i = 0; i < edges.size(); ++i) out[comp[edges[i].u]].edge_ids.push_back(i);
  return out;
}

// Minimum-violation coloring of one component by Gray-code enumeration
// with the smallest vertex fixed to color 0. Returns the violated edge ids.
inline std::vector<std::size_t> min_violation(const Component& c, std::span<const Edge> edges,
                                              std::span<const double> weights,
                                              std::span<const std::uint8_t> parity) {
  const std::size_t k = c.vertices.size();
  std::vector<std::vector<std::size_t>> incident(k);
  std::vector<std::pair<std::size_t, std::size_t>> ends(c.edge_ids.size());
  const auto local = [&](Vertex v) {
    return static_cast<std::size_t>(std::lower_bound(c.vertices.begin(), c.vertices.end(), v) -
                                    c.vertices.begin());
  };
  for (std::size_t j = 0; j < c.edge_ids.size(); ++j) {
    const Edge& e = edges[c.edge_ids[j]];
    ends[j] = {local(e.u), local(e.v)};
    incident[ends[j].first].push_back(j);
    incident[ends[j].second].push_back(j);
  }
  std::vector<std::uint8_t> color(k, 0);
  std::vector<std::uint8_t> violated(c.edge_ids.size(), 0);
  ExactSum cost = 0;
  for (std::size_t j = 0; j < c.edge_ids.size(); ++j) {
    // all-zero coloring violates exactly the neq edges
    violated[j] = parity[c.edge_ids[j]];
    if (violated[j]) cost += weights[c.edge_ids[j]];
  }
  ExactSum best = cost;
  std::uint64_t best_code = 0;
  const std::uint64_t count = std::uint64_t{1} << (k - 1);
  for (std::uint64_t i = 1; i < count; ++i) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(i)) + 1;  // vertex 0 stays fixed
    color[bit] ^= 1;
    for (std::size_t j : incident[bit]) {
      const double w = weights[c.edge_ids[j]];
      if (violated[j]) cost -= w;
      else cost += w;
      violated[j] ^= 1;
    }
    if (cost < best) {
      best = cost;
      best_code = i ^ (i >> 1);
    }
  }
  // Replay the best Gray code word.
  std::fill(color.begin(), color.end(), 0);
  for (std::size_t b = 1; b < k; ++b) color[b] = static_cast<std::uint8_t>((best_code >> (b - 1)) & 1U);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < c.edge_ids.size(); ++j) {
    const auto differ = static_cast<std::uint8_t>(color[ends[j].first] ^ color[ends[j].second]);
    if (differ != parity[c.edge_ids[j]]) out.push_back(c.edge_ids[j]);
  }
  return out;
}

}  // namespace detail

/// Minimum removed weight leaving a legally 2-colorable labeled instance.
/// Components that are already consistent contribute nothing; every other
/// component is searched exhaustively and must have at most `cap` vertices.
inline DistanceReport gen2col_distance(const BoundedDegreeGraph& g, const EdgeParities& labels,
                                       const VertexDistribution& dist, std::size_t cap = 24) {
  const auto edges = g.edges();
  if (labels.size() != edges.size()) throw UsageError("one label per edge expected");
  std::vector<double> weights;
  weights.reserve(edges.size());
  for (const Edge& e : edges) weights.push_back(edge_weight(g, dist, e));

  DistanceReport report;
  report.method = DistanceMethod::bruteforce;
  for (const auto& c : detail::components(g, edges)) {
    std::vector<ParityEdge> constraints;
    for (auto j : c.edge_ids) constraints.push_back({edges[j].u, edges[j].v, labels[j]});
    if (check_parity_consistency(constraints).consistent) continue;
    if (c.vertices.size() > cap) {
      throw CapError("non-colorable component with " + std::to_string(c.vertices.size()) +
                     " vertices exceeds the brute-force cap of " + std::to_string(cap));
    }
    for (auto j : detail::min_violation(c, edges, weights, labels)) report.removed.push_back(edges[j]);
  }
  std::sort(report.removed.begin(), report.removed.end());
  report.distance = removed_weight(g, dist, report.removed);
  return report;
}

inline DistanceReport bipartite_distance(const BoundedDegreeGraph& g, const VertexDistribution& dist,
                                         std::size_t cap = 24) {
  return gen2col_distance(g, all_neq_labels(g), dist, cap);
}

/// Total weight minus a maximum-weight spanning forest (Kruskal, ties broken
/// by canonical edge order); removed set = non-forest edges.
inline DistanceReport cyclefree_distance(const BoundedDegreeGraph& g, const VertexDistribution& dist) {
  auto edges = g.edges();
  std::vector<double> w;
  for (const Edge& e : edges) w.push_back(edge_weight(g, dist, e));
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });

  std::vector<Vertex> parent(g.vertex_count() + 1);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](Vertex x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  DistanceReport report;
  report.method = DistanceMethod::exact_forest;
  for (auto i : order) {
    const Vertex a = find(edges[i].u);
    const Vertex b = find(edges[i].v);
    if (a == b) report.removed.push_back(edges[i]);
    else parent[a] = b;
  }
  std::sort(report.removed.begin(), report.removed.end());
  report.distance = removed_weight(g, dist, report.removed);
  return report;
}

/// Minimum over all edge subsets whose removal leaves a forest; |E| <= cap.
inline DistanceReport exhaustive_cyclefree_distance(const BoundedDegreeGraph& g,
                                                    const VertexDistribution& dist,
                                                    std::size_t cap = 16) {
  const auto edges = g.edges();
  if (edges.size() > cap) throw CapError("exhaustive subset search needs |E| <= " + std::to_string(cap));
  std::vector<double> w;
  for (const Edge& e : edges) w.push_back(edge_weight(g, dist, e));
  std::vector<Vertex> parent(g.vertex_count() + 1);
  const auto find = [&](Vertex x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::optional<ExactSum> best;
  std::uint64_t best_mask = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << edges.size()); ++mask) {
    std::iota(parent.begin(), parent.end(), 0);
    bool forest = true;
    ExactSum cost = 0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if ((mask >> i) & 1U) {
        cost += w[i];
        continue;
      }
      const Vertex a = find(edges[i].u);
      const Vertex b = find(edges[i].v);
      if (a == b) {
        forest = false;
        break;
      }
      parent[a] = b;
    }
    if (forest && (!best || cost < *best)) {
      best = cost;
      best_mask = mask;
    }
  }
  DistanceReport report;
  report.method = DistanceMethod::exhaustive_subset;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if ((best_mask >> i) & 1U) report.removed.push_back(edges[i]);
  }
  report.distance = removed_weight(g, dist, report.removed);
  return report;
}

/// Edge {u, v} replaced by round((D(u) + D(v)) N) parallel edges.
struct MentalMultigraph {
  std::uint64_t scale = 0;
  std::vector<Edge> edges;                   // g.edges()
  std::vector<std::uint64_t> multiplicity;   // aligned with edges
  std::vector<Vertex> retained;              // V': vertices with positive multidegree
  std::vector<std::uint64_t> multidegree;    // indexed by vertex id, entry 0 unused

  std::uint64_t total_edges() const {
    return std::accumulate(multiplicity.begin(), multiplicity.end(), std::uint64_t{0});
  }

  std::uint64_t between(Vertex a, Vertex b) const {
    const auto it = std::lower_bound(edges.begin(), edges.end(), Edge::canonical(a, b));
    if (it == edges.end() || *it != Edge::canonical(a, b)) return 0;
    return multiplicity[static_cast<std::size_t>(it - edges.begin())];
  }
};

inline double min_positive_probability(const VertexDistribution& dist) {
  double rho = 1.0;
  for (double p : dist.probabilities()) {
    if (p > 0.0) rho = std::min(rho, p);
  }
  return rho;
}

/// Requires N * rho >= 10 for the smallest positive D-value rho.
inline MentalMultigraph build_mental_multigraph(const BoundedDegreeGraph& g,
                                                const VertexDistribution& trimmed,
                                                std::uint64_t scale) {
  const double rho = min_positive_probability(trimmed);
  if (static_cast<double>(scale) * rho < 10.0) {
    throw ScaleError("N * rho = " + std::to_string(static_cast<double>(scale) * rho) + " < 10");
  }
  MentalMultigraph mm;
  mm.scale = scale;
  mm.edges = g.edges();
  mm.multidegree.assign(g.vertex_count() + 1, 0);
  for (const Edge& e : mm.edges) {
    const double x = (trimmed.probability(e.u) + trimmed.probability(e.v)) * static_cast<double>(scale);
    const auto m = static_cast<std::uint64_t>(std::floor(x + 0.5));  // round half up
    mm.multiplicity.push_back(m);
    mm.multidegree[e.u] += m;
    mm.multidegree[e.v] += m;
  }
  for (Vertex v = 1; v <= g.vertex_count(); ++v) {
    if (mm.multidegree[v] > 0) mm.retained.push_back(v);
  }
  return mm;
}

/// Minimum number of parallel edges to delete from G' to make it bipartite
/// (exhaustive per non-bipartite component, at most `cap` vertices each).
inline std::uint64_t mental_bipartite_removal(const BoundedDegreeGraph& g, const MentalMultigraph& mm,
                                              std::size_t cap = 24) {
  std::vector<double> weights(mm.multiplicity.begin(), mm.multiplicity.end());
  const EdgeParities neq(mm.edges.size(), 1);
  std::uint64_t total = 0;
  for (const auto& c : detail::components(g, mm.edges)) {
    std::vector<ParityEdge> constraints;
    for (auto j : c.edge_ids) {
      if (mm.multiplicity[j] > 0) constraints.push_back({mm.edges[j].u, mm.edges[j].v, 1});
    }
    if (check_parity_consistency(constraints).consistent) continue;
    if (c.vertices.size() > cap) throw CapError("component too large for exhaustive search");
    for (auto j : detail::min_violation(c, mm.edges, weights, neq)) total += mm.multiplicity[j];
  }
  return total;
}

/// Empirical TV distance between `samples` weighted walk steps at v and the
/// degree-proportional step m(v, .) / d'_v on the explicit G'.
inline double walk_equivalence_check(const BoundedDegreeGraph& g, const VertexDistribution& trimmed,
                                     std::uint64_t scale, Vertex v, std::uint64_t samples,
                                     std::uint64_t seed) {
  const MentalMultigraph mm = build_mental_multigraph(g, trimmed, scale);
  if (!g.contains(v) || mm.multidegree[v] == 0) throw UsageError("vertex is not in V'");
  const auto nbrs = g.neighbors(v);
  std::vector<std::uint64_t> hits(nbrs.size(), 0);
  OracleSession session(g, trimmed, derive_seed(seed, 1), Locality::permissive);
  Rng rng(derive_seed(seed, 2));
  for (std::uint64_t s = 0; s < samples; ++s) {
    const auto u = walk_step(session, v, rng);
    if (!u) throw Error("unexpected dead end at a vertex of V'");
    ++hits[static_cast<std::size_t>(std::lower_bound(nbrs.begin(), nbrs.end(), *u) - nbrs.begin())];
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    const double exact = static_cast<double>(mm.between(v, nbrs[k])) / static_cast<double>(mm.multidegree[v]);
    const double empirical = static_cast<double>(hits[k]) / static_cast<double>(samples);
    tv += std::abs(exact - empirical);
  }
  return tv / 2.0;
}

struct GapStatistics {
  std::uint64_t labelings = 0;
  double threshold = 0.0;          // eps / (8 log2 |V|)
  double fraction_far = 0.0;       // distance >= threshold
  double fraction_positive = 0.0;  // distance > 0
  std::map<double, std::uint64_t> histogram;
  bool exhaustive = true;
};

enum class GapMode { exhaustive, sampled };

/// Distance to legal 2-colorability of (G, tau) over labelings tau:
/// all 2^|E| of them (|E| <= 16), or `samples` uniform ones.
inline GapStatistics reduction_gap_experiment(const BoundedDegreeGraph& g,
                                              const VertexDistribution& dist, double eps,
                                              GapMode mode = GapMode::exhaustive,
                                              std::uint64_t samples = 1000, std::uint64_t seed = 0) {
  const auto edges = g.edges();
  GapStatistics stats;
  stats.threshold = eps / (8.0 * std::log2(static_cast<double>(g.vertex_count())));
  stats.exhaustive = mode == GapMode::exhaustive;
  std::uint64_t far = 0;
  std::uint64_t positive = 0;
  const auto record = [&](double d) {
    ++stats.labelings;
    ++stats.histogram[d];
    if (d >= stats.threshold) ++far;
    if (d > 0.0) ++positive;
  };

  if (mode == GapMode::sampled) {
    if (samples < 1000) throw UsageError("sampled mode needs at least 1000 labelings");
    Rng rng(derive_seed(seed, 0x6a9));
    for (std::uint64_t s = 0; s < samples; ++s) {
      EdgeParities labels(edges.size());
      for (auto& x : labels) x = static_cast<std::uint8_t>(rng.next() >> 63);
      record(gen2col_distance(g, labels, dist).distance);
    }
  } else {
    if (edges.size() > 16) throw CapError("exhaustive labeling enumeration needs |E| <= 16");
    // Per component: the distinct cut masks and the exact weight of every
    // local edge mask; distance(tau) = sum over components of the min over
    // cuts of weight(cut xor tau).
    struct Local {
      std::vector<std::size_t> edge_ids;
      std::vector<std::uint32_t> cuts;
      std::vector<ExactSum> mask_weight;
    };
    std::vector<Local> locals;
    for (const auto& c : detail::components(g, edges)) {
      Local loc;
      loc.edge_ids = c.edge_ids;
      const std::size_t m = c.edge_ids.size();
      loc.mask_weight.assign(std::size_t{1} << m, 0);
      for (std::uint32_t mask = 1; mask < (1U << m); ++mask) {
        const auto low = static_cast<std::size_t>(std::countr_zero(mask));
        loc.mask_weight[mask] = loc.mask_weight[mask & (mask - 1)] + edge_weight(g, dist, edges[c.edge_ids[low]]);
      }
      const std::size_t k = c.vertices.size();
      std::vector<std::uint32_t> cuts;
      for (std::uint64_t coloring = 0; coloring < (std::uint64_t{1} << (k - 1)); ++coloring) {
        std::uint32_t cut = 0;
        for (std::size_t j = 0; j < m; ++j) {
          const Edge& e = edges[c.edge_ids[j]];
          const auto pos = [&](Vertex v) {
            return static_cast<std::size_t>(std::lower_bound(c.vertices.begin(), c.vertices.end(), v) - c.vertices.begin());
          };
          const auto cu = pos(e.u) == 0 ? 0U : static_cast<unsigned>((coloring >> (pos(e.u) - 1)) & 1U);
          const auto cv = pos(e.v) == 0 ? 0U : static_cast<unsigned>((coloring >> (pos(e.v) - 1)) & 1U);
          if (cu != cv) cut |= 1U << j;
        }
        cuts.push_back(cut);
      }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      loc.cuts = std::move(cuts);
      locals.push_back(std::move(loc));
    }
    for (std::uint64_t tau = 0; tau < (std::uint64_t{1} << edges.size()); ++tau) {
      ExactSum total = 0;
      for (const auto& loc : locals) {
        std::uint32_t local_tau = 0;
        for (std::size_t j = 0; j < loc.edge_ids.size(); ++j) {
          if ((tau >> loc.edge_ids[j]) & 1U) local_tau |= 1U << j;
        }
        ExactSum best = loc.mask_weight[loc.cuts.front() ^ local_tau];
        for (auto cut : loc.cuts) best = std::min(best, loc.mask_weight[cut ^ local_tau]);
        total += best;
      }
      record(static_cast<double>(total));
    }
  }
  stats.fraction_far = static_cast<double>(far) / static_cast<double>(stats.labelings);
  stats.fraction_positive = static_cast<double>(positive) / static_cast<double>(stats.labelings);
  return stats;
}

}  // namespace vdf
