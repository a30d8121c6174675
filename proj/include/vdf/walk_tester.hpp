#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vdf/distribution.hpp"
#include "vdf/errors.hpp"
#include "vdf/graph.hpp"
#include "vdf/parity.hpp"
#include "vdf/random.hpp"
#include "vdf/support_estimator.hpp"

namespace vdf {

/// Parity oracle for explored edges: 1 = neq, 0 = eq.
using ParityOracle = std::function<std::uint8_t(Vertex, Vertex)>;

inline std::uint8_t all_neq(Vertex, Vertex) { return 1; }

struct WalkParams {
  std::uint64_t starts = 1;
  std::uint64_t walks_per_start = 1;
  std::uint64_t walk_length = 1;

  friend bool operator==(const WalkParams&, const WalkParams&) = default;
};

/// Walk-count schedule as a function of (eps, n), L = log2(n + 2):
///   starts          = ceil(a / eps)
///   walks_per_start = ceil(b * sqrt(n) * L * eps^-c)
///   walk_length     = ceil(e * (L / eps)^f)
struct WalkSchedule {
  double a = 4.0;
  double b = 1.0;
  double c = 1.0;
  double e = 1.0;
  double f = 1.0;

  WalkParams params_for(double eps, std::uint64_t n) const {
    if (!(eps > 0.0)) throw UsageError("proximity parameter must be positive");
    const double log_n = std::log2(static_cast<double>(n) + 2.0);
    const auto up = [](double x) { return static_cast<std::uint64_t>(std::max(1.0, std::ceil(x))); };
    return {up(a / eps), up(b * std::sqrt(static_cast<double>(n)) * log_n * std::pow(eps, -c)),
            up(e * std::pow(log_n / eps, f))};
  }
};

struct TesterOptions {
  WalkSchedule schedule;
  // Stop a start's walks once every traversable edge incident to the explored
  // region has been traversed; further walks could not add edges, so the
  // decision is unchanged.
  bool stop_when_saturated = true;
  // Independent reruns; reject if any rejects.
  unsigned repetitions = 1;
  // Support-size estimation for the self-contained tester.
  double estimator_eta_divisor = 16.0;
  double estimator_beta = 1.25;
  EstimatorParams estimator;
  Locality locality = Locality::enforce;
};

enum class Decision { accept, reject };

inline const char* to_string(Decision d) { return d == Decision::accept ? "accept" : "reject"; }

struct Verdict {
  Decision decision = Decision::accept;
  ParityWitness witness;
  QueryCounters queries;        // oracle calls actually issued (memoized)
  QueryCounters raw_queries;    // calls an unmemoized walker would issue
  QueryCounters estimator_queries;
  std::uint64_t support_bound = 0;
  std::optional<std::uint64_t> estimate;
  WalkParams params;
  std::uint64_t starts_used = 0;
  std::uint64_t walks = 0;
  std::uint64_t steps = 0;
  bool no_start_vertex = false;
  bool saturated = false;
  double wall_ms = 0.0;

  bool rejected() const { return decision == Decision::reject; }
};

namespace detail {

// Index of the entry selected by r in [0, cum.back()): first k with cum[k] > r.
inline std::size_t choose_weighted(std::span<const double> cum, double r) {
  for (std::size_t k = 0; k < cum.size(); ++k) {
    if (cum[k] > r) return k;
  }
  // r rounded onto the total; take the last entry with positive width.
  std::size_t k = cum.size() - 1;
  while (k > 0 && cum[k] == cum[k - 1]) --k;
  return k;
}

/// Oracle-side view used by the walk: sampling and weights of either D or a
/// trimmed D, memoized per run.
class Explorer {
 public:
  struct Node {
    Vertex v;
    std::uint32_t first;   // offset into the arena
    std::uint32_t degree;
  };

  Explorer(OracleSession& session, const TrimmedDistribution* trimmed, ParityOracle parity)
      : session_(session), trimmed_(trimmed), parity_(std::move(parity)),
        degree_bound_(session.degree_bound()) {
    if (!session.has_graph()) throw UsageError("walk needs a graph oracle");
  }

  double weight(Vertex v) {
    if (auto it = weights_.find(v); it != weights_.end()) return it->second;
    const double w = trimmed_ ? trimmed_->weight(session_, v) : session_.evaluate(v);
    weights_.emplace(v, w);
    return w;
  }

  Vertex sample() {
    if (!trimmed_) {
      ++raw_.sample;
      return session_.sample();
    }
    for (std::uint64_t attempt = 0; attempt < TrimmedDistribution::kMaxRejections; ++attempt) {
      ++raw_.sample;
      ++raw_.eval;
      const Vertex v = session_.sample();
      if (weight(v) > 0.0) return v;
    }
    throw DegenerateDistribution("trimmed sampler exceeded the retry cap");
  }

  bool has_node(Vertex v) const { return index_.contains(v); }

  std::uint32_t node(Vertex v) {
    if (auto it = index_.find(v); it != index_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    const auto first = static_cast<std::uint32_t>(nbr_.size());
    for (unsigned slot = 1; slot <= degree_bound_; ++slot) {
      const auto u = session_.incidence(v, slot);
      if (!u) break;
      nbr_.push_back(*u);
    }
    const auto degree = static_cast<std::uint32_t>(nbr_.size() - first);
    const double wv = weight(v);
    double acc = 0.0;
    for (std::uint32_t k = 0; k < degree; ++k) {
      const Vertex u = nbr_[first + k];
      const double step_weight = wv + weight(u);
      acc += step_weight;
      cum_.push_back(acc);
      edge_parity_.push_back(parity_(v, u));
      traversed_.push_back(0);
      nbr_node_.push_back(-1);
      if (step_weight > 0.0 && !has_node(u)) ++known_edges_;
    }
    nodes_.push_back({v, first, degree});
    index_.emplace(v, id);
    // Pending edges belong to the component of the node that first saw them;
    // components of nodes joined by an edge are merged.
    comp_parent_.push_back(id);
    pending_.push_back(0);
    for (std::uint32_t k = 0; k < degree; ++k) {
      const Vertex u = nbr_[first + k];
      const double step_weight = cum_[first + k] - (k == 0 ? 0.0 : cum_[first + k - 1]);
      if (auto it = index_.find(u); it != index_.end() && u != v) {
        merge(id, it->second);
      } else if (step_weight > 0.0) {
        ++pending_[find_component(id)];
      }
    }
    return id;
  }

  const Node& info(std::uint32_t id) const { return nodes_[id]; }

  std::span<const Vertex> neighbors(std::uint32_t id) const {
    return {nbr_.data() + nodes_[id].first, nodes_[id].degree};
  }

  /// Start-vertex trial loop: s ~ D; output s w.p. deg/2d, a uniform
  /// neighbor w.p. deg/2d, otherwise retry.
  Vertex sample_start(Rng& rng, std::uint64_t max_trials) {
    for (std::uint64_t trial = 0; trial < max_trials; ++trial) {
      const Vertex s = sample();
      const auto id = node(s);
      const auto deg = nodes_[id].degree;
      raw_.graph += std::min<std::uint64_t>(deg + 1, degree_bound_);
      const auto coin = rng.below(2ULL * degree_bound_);
      if (coin < deg) return s;
      if (coin < 2ULL * deg) return nbr_[nodes_[id].first + (coin - deg)];
    }
    throw NoStartVertex("no start vertex after " + std::to_string(max_trials) + " trials");
  }

  struct Step {
    std::uint32_t node;
    std::optional<ParityWitness> conflict;
  };

  /// One weighted step from node `id`; nullopt on a dead end.
  std::optional<Step> step(std::uint32_t id, Rng& rng) {
    const Node n = nodes_[id];
    raw_.graph += std::min<std::uint64_t>(n.degree + 1, degree_bound_);
    raw_.eval += n.degree + 1;
    if (n.degree == 0) return std::nullopt;
    const std::span<const double> cum(cum_.data() + n.first, n.degree);
    const double total = cum.back();
    if (!(total > 0.0)) return std::nullopt;
    const std::size_t k = choose_weighted(cum, rng.uniform01() * total);
    const std::size_t slot = n.first + k;
    const Vertex u = nbr_[slot];
    if (nbr_node_[slot] < 0) nbr_node_[slot] = static_cast<std::int64_t>(node(u));
    const auto uid = static_cast<std::uint32_t>(nbr_node_[slot]);

    std::optional<ParityWitness> conflict;
    if (traversed_[slot] == 0) {
      traversed_[slot] = 1;
      const auto back = reverse_slot(uid, n.v);
      if (traversed_[back] == 0) {
        traversed_[back] = 1;
        --pending_[find_component(id)];
        conflict = explored_.add(n.v, u, edge_parity_[slot]);
      }
    }
    return Step{uid, std::move(conflict)};
  }

  // Every traversable edge incident to a visited vertex has been traversed.
  bool saturated() const { return explored_.edge_count() == known_edges_; }

  // Same, restricted to the explored component containing node `id`; walks
  // from there can never leave it.
  bool saturated_at(std::uint32_t id) { return pending_[find_component(id)] == 0; }

  const ExploredSubgraph& explored() const { return explored_; }
  const QueryCounters& raw() const { return raw_; }

 private:
  std::uint32_t find_component(std::uint32_t x) {
    while (comp_parent_[x] != x) x = comp_parent_[x] = comp_parent_[comp_parent_[x]];
    return x;
  }

  void merge(std::uint32_t a, std::uint32_t b) {
    a = find_component(a);
    b = find_component(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);  // keep the older root
    comp_parent_[a] = b;
    pending_[b] += pending_[a];
  }

  std::size_t reverse_slot(std::uint32_t uid, Vertex v) const {
    const Node& n = nodes_[uid];
    const auto begin = nbr_.begin() + n.first;
    const auto it = std::lower_bound(begin, begin + n.degree, v);
    return static_cast<std::size_t>(it - nbr_.begin());
  }

  OracleSession& session_;
  const TrimmedDistribution* trimmed_;
  ParityOracle parity_;
  unsigned degree_bound_;

  std::unordered_map<Vertex, double> weights_;
  std::unordered_map<Vertex, std::uint32_t> index_;
  std::vector<Node> nodes_;
  std::vector<Vertex> nbr_;
  std::vector<double> cum_;
  std::vector<std::uint8_t> edge_parity_;
  std::vector<std::uint8_t> traversed_;
  std::vector<std::int64_t> nbr_node_;
  std::uint64_t known_edges_ = 0;
  std::vector<std::uint32_t> comp_parent_;
  std::vector<std::uint64_t> pending_;
  ExploredSubgraph explored_;
  QueryCounters raw_;
};

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Trials allowed before declaring that no start vertex exists. Each trial
// succeeds with probability (total edge weight) / 2, which is at least eps / 2
// on eps-far inputs, so a false give-up has probability below 1 / (100 starts).
inline std::uint64_t start_trial_cap(double eps, std::uint64_t starts) {
  return static_cast<std::uint64_t>(
      std::ceil(2.0 * std::log(100.0 * static_cast<double>(starts)) / eps));
}

inline Verdict run_walks(OracleSession& session, const TrimmedDistribution* trimmed,
                         const ParityOracle& parity, const WalkParams& params, double eps,
                         bool stop_when_saturated, Rng& rng) {
  Explorer explorer(session, trimmed, parity);
  Verdict verdict;
  verdict.params = params;
  const auto cap = start_trial_cap(eps, params.starts);

  const auto finish = [&] {
    verdict.raw_queries = explorer.raw();
    verdict.saturated = explorer.saturated();
  };

  for (std::uint64_t k = 0; k < params.starts; ++k) {
    Vertex s;
    try {
      s = explorer.sample_start(rng, cap);
    } catch (const NoStartVertex&) {
      verdict.no_start_vertex = true;
      break;
    }
    ++verdict.starts_used;
    for (std::uint64_t w = 0; w < params.walks_per_start; ++w) {
      const auto start = explorer.node(s);
      if (stop_when_saturated && explorer.saturated_at(start)) break;
      ++verdict.walks;
      auto current = start;
      for (std::uint64_t t = 0; t < params.walk_length; ++t) {
        auto next = explorer.step(current, rng);
        if (!next) break;  // dead end
        ++verdict.steps;
        if (next->conflict) {
          verdict.decision = Decision::reject;
          verdict.witness = std::move(*next->conflict);
          finish();
          return verdict;
        }
        current = next->node;
        if (stop_when_saturated && explorer.saturated_at(current)) break;
      }
    }
  }
  finish();
  return verdict;
}

inline void check_witness(const Verdict& v) {
  if (!v.rejected()) return;
  if (!is_odd_parity_cycle(v.witness) || check_parity_consistency(v.witness).consistent) {
    throw Error("internal: rejection witness failed validation");
  }
}

}  // namespace detail

/// Weighted access to D, or to a trimmed D when `trimmed` is given.
///
/// sample_start_vertex returns v with probability proportional to
/// p(v) = sum over u in Gamma(v) of (D(v) + D(u)) / 2d.
inline Vertex sample_start_vertex(OracleSession& session, Rng& rng,
                                  const TrimmedDistribution* trimmed = nullptr,
                                  std::uint64_t max_trials = 1'000'000) {
  detail::Explorer explorer(session, trimmed, all_neq);
  return explorer.sample_start(rng, max_trials);
}

/// One step from v to neighbor u with probability proportional to
/// D(v) + D(u). Issues the incidence queries for Gamma(v) and |Gamma(v)| + 1
/// evaluations (v and each neighbor). nullopt is the dead-end signal.
inline std::optional<Vertex> walk_step(OracleSession& session, Vertex v, Rng& rng,
                                       const TrimmedDistribution* trimmed = nullptr) {
  detail::Explorer explorer(session, trimmed, all_neq);
  const auto id = explorer.node(v);
  auto next = explorer.step(id, rng);
  if (!next) return std::nullopt;
  return explorer.info(next->node).v;
}

namespace detail {

inline Verdict test_with_bound(const BoundedDegreeGraph& graph, const VertexDistribution& dist,
                               const ParityOracle& parity, double eps, std::uint64_t bound,
                               std::uint64_t seed, const TesterOptions& options) {
  if (!(eps > 0.0 && eps < 1.0)) throw UsageError("proximity parameter must lie in (0, 1)");
  if (bound == 0) throw UsageError("support bound must be positive");
  const auto started = std::chrono::steady_clock::now();
  const TrimmedDistribution trimmed = trim(dist, eps / 4.0, bound);
  const double inner_eps = eps / 2.0;
  const WalkParams params = options.schedule.params_for(inner_eps, bound);

  Verdict total;
  total.params = params;
  total.support_bound = bound;
  const unsigned reps = std::max(1U, options.repetitions);
  for (unsigned r = 0; r < reps; ++r) {
    const std::uint64_t run_seed = r == 0 ? seed : derive_seed(seed, 0x4e70 + r);
    OracleSession session(graph, dist, derive_seed(run_seed, 1), options.locality);
    Rng rng(derive_seed(run_seed, 2));
    Verdict v = run_walks(session, &trimmed, parity, params, inner_eps,
                          options.stop_when_saturated, rng);
    total.queries += session.counters();
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
  check_witness(total);
  total.wall_ms = elapsed_ms(started);
  return total;
}

}  // namespace detail

/// Bipartiteness tester given an upper bound on the minimal eps/4-effective
/// support size: trims D at eps/4 / bound and walks at proximity eps/2.
/// Bipartite graphs are accepted with probability 1.
inline Verdict test_bipartite_with_bound(const BoundedDegreeGraph& graph,
                                         const VertexDistribution& dist, double eps,
                                         std::uint64_t bound, std::uint64_t seed,
                                         const TesterOptions& options = {}) {
  return detail::test_with_bound(graph, dist, all_neq, eps, bound, seed, options);
}

/// Same walk and transcript as test_bipartite_with_bound, with each explored
/// edge carrying the parity reported by `labels` (1 = neq, 0 = eq).
inline Verdict test_generalized_2coloring(const BoundedDegreeGraph& graph,
                                          const ParityOracle& labels,
                                          const VertexDistribution& dist, double eps,
                                          std::uint64_t bound, std::uint64_t seed,
                                          const TesterOptions& options = {}) {
  return detail::test_with_bound(graph, dist, labels, eps, bound, seed, options);
}

/// Support bound used by the self-contained testers: the refined estimate at
/// effectiveness eps / 16.
inline RefinedEstimate estimate_support_bound(const VertexDistribution& dist, double eps,
                                              std::uint64_t seed, const TesterOptions& options) {
  EstimatorParams params = options.estimator;
  params.eta = eps / options.estimator_eta_divisor;
  params.beta = options.estimator_beta;
  return refined_estimate(dist, params, derive_seed(seed, 0xe57));
}

/// Self-contained bipartiteness tester: estimates the support bound, then
/// delegates to test_bipartite_with_bound. One-sided for any estimate.
inline Verdict test_bipartite(const BoundedDegreeGraph& graph, const VertexDistribution& dist,
                              double eps, std::uint64_t seed, const TesterOptions& options = {}) {
  if (!(eps > 0.0 && eps < 1.0)) throw UsageError("proximity parameter must lie in (0, 1)");
  const auto started = std::chrono::steady_clock::now();
  const RefinedEstimate est = estimate_support_bound(dist, eps, seed, options);
  Verdict v = test_bipartite_with_bound(graph, dist, eps, est.estimate, seed, options);
  v.estimate = est.estimate;
  v.estimator_queries = est.queries;
  v.queries += est.queries;
  v.raw_queries += est.queries;
  v.wall_ms = detail::elapsed_ms(started);
  return v;
}

}  // namespace vdf
