#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>

#include "vdf/walk_tester.hpp"

namespace vdf {

enum class Label : std::uint8_t { eq = 0, neq = 1 };

inline const char* to_string(Label l) { return l == Label::eq ? "eq" : "neq"; }

/// Lazy uniformly random labeling tau : E -> {eq, neq}.
///
/// A label is a keyed hash of the canonical edge under the seed, so it is
/// fixed before the edge is ever seen; the cache only remembers issued labels.
class EdgeLabeler {
 public:
  explicit EdgeLabeler(std::uint64_t seed) : key_(derive_seed(seed, 0x7a0)) {}

  Label label(Vertex a, Vertex b) {
    const Edge e = Edge::canonical(a, b);
    const std::uint64_t id = (std::uint64_t{e.u} << 32) | e.v;
    if (auto it = cache_.find(id); it != cache_.end()) return it->second;
    const Label l = (mix64(key_ ^ mix64(id)) & 1U) != 0 ? Label::neq : Label::eq;
    cache_.emplace(id, l);
    return l;
  }

  std::uint8_t parity(Vertex a, Vertex b) { return static_cast<std::uint8_t>(label(a, b)); }

  std::size_t issued() const { return cache_.size(); }

 private:
  std::uint64_t key_;
  std::unordered_map<std::uint64_t, Label> cache_;
};

enum class LabelMode { random, all_neq, all_eq };

struct CycleTesterOptions {
  TesterOptions inner;
  // Inner proximity eps' = kappa * eps / log2(n + 2).
  double kappa = 1.0 / 8.0;
  unsigned reps = 4;
  LabelMode labels = LabelMode::random;
  std::optional<std::uint64_t> support_bound;
};

inline double cycle_inner_eps(double eps, std::uint64_t bound, double kappa) {
  return kappa * eps / std::log2(static_cast<double>(bound) + 2.0);
}

/// Seed of repetition r's inner generalized 2-coloring run.
inline std::uint64_t cycle_rep_seed(std::uint64_t seed, unsigned r) {
  return derive_seed(seed, 0xc7c0 + r);
}

/// Cycle-freeness tester: each repetition draws a fresh random labeling and
/// runs the generalized 2-coloring tester at eps' on the labeled instance;
/// rejects if any repetition rejects. Forests are never rejected, since every
/// labeling of a forest is legally 2-colorable.
inline Verdict test_cycle_free(const BoundedDegreeGraph& graph, const VertexDistribution& dist,
                               double eps, std::uint64_t seed,
                               const CycleTesterOptions& options = {}) {
  if (!(eps > 0.0 && eps < 1.0)) throw UsageError("proximity parameter must lie in (0, 1)");
  const auto started = std::chrono::steady_clock::now();
  Verdict total;
  std::uint64_t bound;
  if (options.support_bound) {
    bound = *options.support_bound;
  } else {
    const RefinedEstimate est = estimate_support_bound(dist, eps, seed, options.inner);
    bound = est.estimate;
    total.estimate = est.estimate;
    total.estimator_queries = est.queries;
    total.queries += est.queries;
    total.raw_queries += est.queries;
  }
  total.support_bound = bound;
  const double inner_eps = cycle_inner_eps(eps, bound, options.kappa);

  for (unsigned r = 0; r < std::max(1U, options.reps); ++r) {
    const std::uint64_t rep_seed = cycle_rep_seed(seed, r);
    ParityOracle parity;
    switch (options.labels) {
      case LabelMode::all_neq: parity = all_neq; break;
      case LabelMode::all_eq: parity = [](Vertex, Vertex) -> std::uint8_t { return 0; }; break;
      case LabelMode::random: {
        auto labeler = std::make_shared<EdgeLabeler>(rep_seed);
        parity = [labeler](Vertex a, Vertex b) { return labeler->parity(a, b); };
        break;
      }
    }
    Verdict v = test_generalized_2coloring(graph, parity, dist, inner_eps, bound, rep_seed,
                                           options.inner);
    total.params = v.params;
    total.queries += v.queries;
    total.raw_queries += v.raw_queries;
    total.starts_used += v.starts_used;
    total.walks += v.walks;
    total.steps += v.steps;
    total.no_start_vertex = total.no_start_vertex || v.no_start_vertex;
    total.saturated = v.saturated;
    if (v.rejected()) {
      total.decision = Decision::reject;
      total.witness = std::move(v.witness);
      break;
    }
  }
  total.wall_ms = detail::elapsed_ms(started);
  return total;
}

}  // namespace vdf
