#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "vdf/distribution.hpp"
#include "vdf/errors.hpp"

namespace vdf {

struct EstimatorParams {
  double eta = 0.1;
  double beta = 1.5;
  // Per-iteration sample size m_i = ceil(sample_constant / eta * ln(20 (i+1)^2)).
  double sample_constant = 48.0;
  // Confidence parameter of the bucket-sampling step.
  double confidence_t = 7.0;
  // Multiplier on the bucket sample size t * l / ((beta-1)^2 eta').
  double bucket_constant = 1.0;
  // Extra samples for the light-mass test: ceil(light_constant / eta).
  double light_constant = 64.0;
  unsigned max_iterations = 64;

  void validate(bool needs_beta) const {
    if (!(eta > 0.0 && eta < 0.25)) throw UsageError("estimator needs 0 < eta < 1/4");
    if (needs_beta && !(beta > 1.0 && beta <= 2.0)) throw UsageError("estimator needs 1 < beta <= 2");
  }
};

struct RoughEstimate {
  std::uint64_t estimate = 0;
  unsigned iterations = 0;
  QueryCounters queries;
};

struct RefinedEstimate {
  std::uint64_t estimate = 0;
  std::uint64_t rough = 0;
  unsigned buckets = 0;          // l
  unsigned kept_buckets = 0;     // |I|
  double heavy_threshold = 0.0;  // (beta-1) eta' / n_hat
  double light_mass = 0.0;       // estimate of 1 - D(H)
  bool disposed = false;
  QueryCounters queries;
};

namespace detail {

inline std::uint64_t iteration_samples(const EstimatorParams& p, unsigned i) {
  const double ip1 = static_cast<double>(i) + 1.0;
  return static_cast<std::uint64_t>(std::ceil(p.sample_constant / p.eta * std::log(20.0 * ip1 * ip1)));
}

inline std::uint64_t ceil_estimate(double value) {
  if (!(value < 9.0e18)) throw EstimateOverflow("estimate exceeds the representable range");
  return static_cast<std::uint64_t>(std::ceil(value - 1e-9 * value));
}

// Iteration i draws m_i samples and counts those with D-value below
// light_factor * eta / 2^i; halts with 2^i / eta once that count is at most
// halt_factor * eta * m_i.
inline RoughEstimate halving_search(OracleSession& session, const EstimatorParams& p,
                                    double light_factor, double halt_factor) {
  const QueryCounters start = session.counters();
  for (unsigned i = 1; i <= p.max_iterations; ++i) {
    const std::uint64_t m = iteration_samples(p, i);
    const double threshold = light_factor * p.eta / std::ldexp(1.0, static_cast<int>(i));
    std::uint64_t light = 0;
    for (std::uint64_t k = 0; k < m; ++k) {
      const Vertex v = session.sample();
      if (session.evaluate(v) < threshold) ++light;
    }
    if (static_cast<double>(light) <= halt_factor * p.eta * static_cast<double>(m)) {
      return {ceil_estimate(std::ldexp(1.0, static_cast<int>(i)) / p.eta), i,
              session.counters() - start};
    }
  }
  throw EstimateOverflow("no halt within " + std::to_string(p.max_iterations) +
                         " iterations; distribution is effectively unbounded at this eta");
}

}  // namespace detail

/// Doubling estimator: light elements are those below eta / 2^i, halting
/// when at most 3 eta m of the sample is light.
inline RoughEstimate rough_estimate(OracleSession& session, const EstimatorParams& params) {
  params.validate(false);
  return detail::halving_search(session, params, 1.0, 3.0);
}

/// beta-variant used by the refined estimator: light below (beta-1) eta / 2^i,
/// halting at beta^2 eta m.
inline RoughEstimate rough_estimate_beta(OracleSession& session, const EstimatorParams& params) {
  params.validate(true);
  return detail::halving_search(session, params, params.beta - 1.0, params.beta * params.beta);
}

/// Index i >= 1 with beta^{-i} <= p < beta^{-i+1}; p = 1 maps to bucket 1.
inline unsigned weight_bucket(double p, double beta) {
  if (p >= 1.0) return 1;
  auto i = static_cast<unsigned>(std::max(1.0, std::ceil(-std::log(p) / std::log(beta))));
  // Correct log rounding at bucket edges.
  while (i > 1 && p >= std::pow(beta, -static_cast<double>(i - 1))) --i;
  while (p < std::pow(beta, -static_cast<double>(i))) ++i;
  return i;
}

/// Refined estimator of the minimal effective support size.
///
/// 1. n_hat from the beta-variant doubling search.
/// 2. H = {v : D(v) >= (beta-1) eta' / n_hat} with eta' = beta^3 eta.
/// 3. One shared sample estimates D(W_i) for the l weight buckets
///    W_i = {v in H : beta^{-i} <= D(v) < beta^{-i+1}}; buckets with estimated
///    mass >= (beta-1) eta'' / l (eta'' = beta^4 eta) form I, and contribute
///    D(W_i) * beta^{i - 1/2} elements each.
/// 4. When the light mass 1 - D(H) is estimated below the midpoint of
///    [eta / beta, beta eta], the lightest buckets of I are trimmed until the
///    retained estimated mass is 1 - eta. No queries are made in this step.
inline RefinedEstimate refined_estimate(OracleSession& session, const EstimatorParams& params) {
  params.validate(true);
  const QueryCounters start = session.counters();
  const double beta = params.beta;
  const double eta1 = beta * beta * beta * params.eta;
  const double eta2 = beta * eta1;

  RefinedEstimate out;
  out.rough = rough_estimate_beta(session, params).estimate;
  const double n_hat = static_cast<double>(out.rough);
  out.heavy_threshold = (beta - 1.0) * eta1 / n_hat;
  out.buckets = static_cast<unsigned>(
      std::max(1.0, std::ceil(std::log(n_hat / ((beta - 1.0) * eta1)) / std::log(beta))));
  const unsigned l = out.buckets;

  const auto bucket_samples = static_cast<std::uint64_t>(std::ceil(
      params.bucket_constant * params.confidence_t * l / ((beta - 1.0) * (beta - 1.0) * eta1)));
  std::vector<std::uint64_t> hits(l + 1, 0);
  for (std::uint64_t k = 0; k < bucket_samples; ++k) {
    const double p = session.evaluate(session.sample());
    if (p < out.heavy_threshold) continue;
    ++hits[std::min(weight_bucket(p, beta), l)];
  }

  const double keep_mass = (beta - 1.0) * eta2 / l;
  std::vector<double> mass(l + 1, 0.0);
  std::vector<double> size(l + 1, 0.0);
  double retained = 0.0;
  for (unsigned i = 1; i <= l; ++i) {
    const double m = static_cast<double>(hits[i]) / static_cast<double>(bucket_samples);
    if (m < keep_mass || m == 0.0) continue;
    ++out.kept_buckets;
    mass[i] = m;
    size[i] = m * std::pow(beta, static_cast<double>(i) - 0.5);
    retained += m;
  }

  const auto light_samples = static_cast<std::uint64_t>(std::ceil(params.light_constant / params.eta));
  std::uint64_t light = 0;
  for (std::uint64_t k = 0; k < light_samples; ++k) {
    if (session.evaluate(session.sample()) < out.heavy_threshold) ++light;
  }
  out.light_mass = static_cast<double>(light) / static_cast<double>(light_samples);

  if (out.light_mass < params.eta * (beta + 1.0 / beta) / 2.0) {
    double excess = retained - (1.0 - params.eta);
    for (unsigned i = l; i >= 1 && excess > 0.0; --i) {
      if (mass[i] == 0.0) continue;
      out.disposed = true;
      const double take = std::min(mass[i], excess);
      size[i] *= (mass[i] - take) / mass[i];
      excess -= take;
    }
  }

  double total = 0.0;
  for (unsigned i = 1; i <= l; ++i) total += size[i];
  out.estimate = std::max<std::uint64_t>(1, detail::ceil_estimate(total));
  out.queries = session.counters() - start;
  return out;
}

/// Convenience wrappers owning their session.
inline RoughEstimate rough_estimate(const VertexDistribution& dist, const EstimatorParams& params,
                                    std::uint64_t seed) {
  OracleSession session(dist, derive_seed(seed, 0x5a));
  return rough_estimate(session, params);
}

inline RefinedEstimate refined_estimate(const VertexDistribution& dist,
                                        const EstimatorParams& params, std::uint64_t seed) {
  OracleSession session(dist, derive_seed(seed, 0x5a));
  return refined_estimate(session, params);
}

}  // namespace vdf
