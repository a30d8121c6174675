#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vdf/errors.hpp"
#include "vdf/graph.hpp"
#include "vdf/random.hpp"

namespace vdf {

/// Explicit probability map over the vertex universe [1, vertex_count].
///
/// Sampling walks a cumulative table, so zero-probability vertices are never
/// drawn. Immutable after construction and safe to share between trials.
class VertexDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;
  static constexpr double kLoadTolerance = 1e-9;

  VertexDistribution() = default;

  /// probabilities[v - 1] = D(v). Sums within 1e-9 of 1 are renormalized;
  /// anything further off is rejected.
  explicit VertexDistribution(std::vector<double> probabilities)
      : probs_(std::move(probabilities)) {
    if (probs_.empty()) throw UsageError("distribution needs a non-empty universe");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw UsageError("probabilities must be finite and >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kLoadTolerance) {
      throw UsageError("probabilities sum to " + std::to_string(sum) + ", not 1");
    }
    if (sum != 1.0) {
      for (double& p : probs_) p /= sum;
    }
    cumulative_.resize(probs_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      acc += probs_[i];
      cumulative_[i] = acc;
    }
  }

  std::size_t vertex_count() const { return probs_.size(); }
  bool contains(Vertex v) const { return v >= 1 && v <= probs_.size(); }

  double probability(Vertex v) const {
    if (!contains(v)) {
      throw UsageError("vertex " + std::to_string(v) + " outside the distribution's universe");
    }
    return probs_[v - 1];
  }

  std::span<const double> probabilities() const { return probs_; }

  std::size_t support_size() const {
    return static_cast<std::size_t>(
        std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }));
  }

  /// One draw of D. Does not touch any query counter; see OracleSession.
  Vertex draw(Rng& rng) const {
    const double target = rng.uniform01() * cumulative_.back();
    // upper_bound skips zero-width entries, whose cumulative value equals
    // their predecessor's.
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    if (idx == probs_.size()) {
      // target rounded up to the total
      idx = probs_.size() - 1;
      while (probs_[idx] == 0.0) --idx;
    }
    return static_cast<Vertex>(idx + 1);
  }

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

inline VertexDistribution make_uniform(std::size_t n) {
  return VertexDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

/// Uniform over `support` (1-based ids) inside a universe of size n.
inline VertexDistribution make_uniform_on(std::size_t n, std::span<const Vertex> support) {
  std::vector<double> p(n, 0.0);
  for (Vertex v : support) p[v - 1] = 1.0 / static_cast<double>(support.size());
  return VertexDistribution(std::move(p));
}

inline VertexDistribution make_point_mass(std::size_t n, Vertex v) {
  std::vector<double> p(n, 0.0);
  p.at(v - 1) = 1.0;
  return VertexDistribution(std::move(p));
}

/// D(k) proportional to k^{-s} over [1, n].
inline VertexDistribution make_zipf(std::size_t n, double s) {
  std::vector<double> p(n);
  double z = 0.0;
  for (std::size_t k = 1; k <= n; ++k) z += std::pow(static_cast<double>(k), -s);
  for (std::size_t k = 1; k <= n; ++k) p[k - 1] = std::pow(static_cast<double>(k), -s) / z;
  return VertexDistribution(std::move(p));
}

/// Normalized i.i.d. exponential weights (a flat Dirichlet draw).
inline VertexDistribution make_random(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xd157));
  std::vector<double> p(n);
  double z = 0.0;
  for (auto& x : p) {
    x = -std::log1p(-rng.uniform01());
    z += x;
  }
  for (auto& x : p) x /= z;
  return VertexDistribution(std::move(p));
}

/// Parses "v p" lines; unlisted vertices get probability 0. With
/// vertex_count == 0 the universe is [1, largest listed id].
inline VertexDistribution load_distribution(std::string_view text, std::size_t vertex_count = 0) {
  std::vector<std::pair<std::size_t, double>> atoms;
  std::size_t max_id = 0;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = detail::trim_ws(raw);
    if (line.empty() || line.front() == '#') return;
    const auto parts = detail::tokens(line);
    if (parts.size() != 2) throw ParseError(line_no, "expected \"v p\"");
    const auto v = detail::parse_number<std::size_t>(parts[0]);
    const auto p = detail::parse_number<double>(parts[1]);
    if (!v || *v == 0) throw ParseError(line_no, "bad vertex id");
    if (!p || !(*p >= 0.0) || !std::isfinite(*p)) throw ParseError(line_no, "bad probability");
    atoms.emplace_back(*v, *p);
    max_id = std::max(max_id, *v);
  });
  const std::size_t n = vertex_count == 0 ? max_id : vertex_count;
  if (n == 0) throw ParseError(1, "empty distribution");
  std::vector<double> probs(n, 0.0);
  for (auto [v, p] : atoms) {
    if (v > n) throw UsageError("vertex " + std::to_string(v) + " outside [1, " + std::to_string(n) + "]");
    if (probs[v - 1] != 0.0) throw UsageError("vertex " + std::to_string(v) + " listed twice");
    probs[v - 1] = p;
  }
  return VertexDistribution(std::move(probs));
}

/// One "v p" line per positive atom, shortest round-trip decimal form.
inline std::string store_distribution(const VertexDistribution& dist) {
  std::string out;
  char buf[64];
  const auto probs = dist.probabilities();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    const auto res = std::to_chars(buf, buf + sizeof buf, probs[i]);
    out += std::to_string(i + 1) + " " + std::string(buf, res.ptr) + "\n";
  }
  return out;
}

struct QueryCounters {
  std::uint64_t sample = 0;
  std::uint64_t eval = 0;
  std::uint64_t graph = 0;

  std::uint64_t total() const { return sample + eval + graph; }

  QueryCounters& operator+=(const QueryCounters& o) {
    sample += o.sample;
    eval += o.eval;
    graph += o.graph;
    return *this;
  }
  friend QueryCounters operator-(QueryCounters a, const QueryCounters& b) {
    a.sample -= b.sample;
    a.eval -= b.eval;
    a.graph -= b.graph;
    return a;
  }
  friend bool operator==(const QueryCounters&, const QueryCounters&) = default;
};

enum class Locality { enforce, permissive };

/// Counted access to sD, eD and g for a single trial.
///
/// Every answer adds the returned vertices to the revealed set. With
/// Locality::enforce, evaluating or querying a vertex that no prior answer
/// returned throws LocalityViolation.
class OracleSession {
 public:
  OracleSession(const VertexDistribution& dist, std::uint64_t sampler_seed,
                Locality locality = Locality::enforce)
      : OracleSession(nullptr, dist, sampler_seed, locality) {}

  OracleSession(const BoundedDegreeGraph& graph, const VertexDistribution& dist,
                std::uint64_t sampler_seed, Locality locality = Locality::enforce)
      : OracleSession(&graph, dist, sampler_seed, locality) {
    if (graph.vertex_count() != dist.vertex_count()) {
      throw UsageError("graph and distribution must share the vertex universe");
    }
  }

  /// sD.
  Vertex sample() {
    ++counters_.sample;
    const Vertex v = dist_->draw(rng_);
    reveal(v);
    return v;
  }

  /// eD.
  double evaluate(Vertex v) {
    check_query(v);
    ++counters_.eval;
    return dist_->probability(v);
  }

  /// Ratio form of eD: D(w1) / D(w2), or nullopt when D(w2) = 0.
  std::optional<double> ratio(Vertex w1, Vertex w2) {
    check_query(w1);
    check_query(w2);
    ++counters_.eval;
    const double den = dist_->probability(w2);
    if (den == 0.0) return std::nullopt;
    return dist_->probability(w1) / den;
  }

  /// g(v, slot).
  std::optional<Vertex> incidence(Vertex v, unsigned slot) {
    if (graph_ == nullptr) throw UsageError("session has no graph oracle");
    check_query(v);
    ++counters_.graph;
    const auto u = graph_->incidence(v, slot);
    if (u) reveal(*u);
    return u;
  }

  bool revealed(Vertex v) const { return v < revealed_.size() && revealed_[v] != 0; }
  const QueryCounters& counters() const { return counters_; }
  std::size_t vertex_count() const { return dist_->vertex_count(); }
  unsigned degree_bound() const { return graph_ ? graph_->degree_bound() : 0; }
  bool has_graph() const { return graph_ != nullptr; }
  Locality locality() const { return locality_; }

 private:
  OracleSession(const BoundedDegreeGraph* graph, const VertexDistribution& dist,
                std::uint64_t sampler_seed, Locality locality)
      : graph_(graph),
        dist_(&dist),
        rng_(sampler_seed),
        locality_(locality),
        revealed_(dist.vertex_count() + 1, 0) {}

  void reveal(Vertex v) { revealed_[v] = 1; }

  void check_query(Vertex v) {
    if (!dist_->contains(v)) {
      throw UsageError("vertex " + std::to_string(v) + " outside [1, " +
                       std::to_string(dist_->vertex_count()) + "]");
    }
    if (locality_ == Locality::enforce && revealed_[v] == 0) {
      throw LocalityViolation("query on vertex " + std::to_string(v) +
                              " that no oracle answer returned");
    }
  }

  const BoundedDegreeGraph* graph_;
  const VertexDistribution* dist_;
  Rng rng_;
  Locality locality_;
  std::vector<std::uint8_t> revealed_;
  QueryCounters counters_;
};

/// D conditioned on {v : D(v) > eta / n}.
///
/// The explicit form (probability(), materialize()) serves verification. Test
/// code sees the trimmed distribution only through sample() and weight(),
/// which go through an OracleSession: sampling rejects draws of D that fall
/// at or below the threshold, and weight() returns the unnormalized value, so
/// ratios between trimmed values equal the ratios between D-values.
class TrimmedDistribution {
 public:
  static constexpr std::uint64_t kMaxRejections = 10'000'000;

  TrimmedDistribution(const VertexDistribution& base, double eta, std::uint64_t bound)
      : base_(&base), eta_(eta), bound_(bound), threshold_(eta / static_cast<double>(bound)) {
    if (!(eta > 0.0 && eta < 1.0)) throw UsageError("trim needs 0 < eta < 1");
    if (bound == 0) throw UsageError("trim needs a positive support bound");
    for (double p : base.probabilities()) {
      if (p > threshold_) normalizer_ += p;
    }
    if (normalizer_ == 0.0) {
      throw DegenerateDistribution("every vertex is at or below the trimming threshold");
    }
  }

  const VertexDistribution& base() const { return *base_; }
  double eta() const { return eta_; }
  std::uint64_t bound() const { return bound_; }
  double threshold() const { return threshold_; }
  double normalizer() const { return normalizer_; }

  bool kept(double base_probability) const { return base_probability > threshold_; }

  double probability(Vertex v) const {
    const double p = base_->probability(v);
    return kept(p) ? p / normalizer_ : 0.0;
  }

  VertexDistribution materialize() const {
    std::vector<double> p(base_->vertex_count());
    for (Vertex v = 1; v <= p.size(); ++v) p[v - 1] = probability(v);
    return VertexDistribution(std::move(p));
  }

  /// Total-variation distance to the base distribution.
  double tv_to_base() const {
    double acc = 0.0;
    for (Vertex v = 1; v <= base_->vertex_count(); ++v) {
      acc += std::abs(base_->probability(v) - probability(v));
    }
    return acc / 2.0;
  }

  /// Rejection sampling via sD and eD; counts every attempt.
  Vertex sample(OracleSession& session) const {
    for (std::uint64_t attempt = 0; attempt < kMaxRejections; ++attempt) {
      const Vertex v = session.sample();
      if (kept(session.evaluate(v))) return v;
    }
    throw DegenerateDistribution("trimmed sampler exceeded the retry cap");
  }

  /// Unnormalized trimmed value via one eD query.
  double weight(OracleSession& session, Vertex v) const {
    const double p = session.evaluate(v);
    return kept(p) ? p : 0.0;
  }

 private:
  const VertexDistribution* base_;
  double eta_;
  std::uint64_t bound_;
  double threshold_;
  double normalizer_ = 0.0;
};

inline TrimmedDistribution trim(const VertexDistribution& dist, double eta, std::uint64_t bound) {
  return TrimmedDistribution(dist, eta, bound);
}

/// Minimal n such that the mass outside the n heaviest atoms is at most eta.
inline std::uint64_t exact_effective_support_size(const VertexDistribution& dist, double eta) {
  if (!(eta >= 0.0)) throw UsageError("effectiveness must be >= 0");
  std::vector<double> atoms;
  for (double p : dist.probabilities()) {
    if (p > 0.0) atoms.push_back(p);
  }
  std::sort(atoms.begin(), atoms.end());
  // Strip the lightest atoms while their total stays within eta; the slack
  // absorbs summation rounding on exactly representable boundaries.
  const double budget = eta * (1.0 + 1e-9);
  double stripped = 0.0;
  std::size_t removed = 0;
  while (removed < atoms.size() && stripped + atoms[removed] <= budget) {
    stripped += atoms[removed];
    ++removed;
  }
  return atoms.size() - removed;
}

/// Total-variation distance between two distributions over one universe.
inline double total_variation(const VertexDistribution& a, const VertexDistribution& b) {
  if (a.vertex_count() != b.vertex_count()) throw UsageError("universe mismatch");
  double acc = 0.0;
  for (Vertex v = 1; v <= a.vertex_count(); ++v) {
    acc += std::abs(a.probability(v) - b.probability(v));
  }
  return acc / 2.0;
}

}  // namespace vdf
