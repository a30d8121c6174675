// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments pick
// a subset of criteria by number.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vdf/vdf.hpp"

using namespace vdf;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

bool verbose() { return std::getenv("VDF_ACCEPTANCE_VERBOSE") != nullptr; }

struct NamedDist {
  std::string name;
  VertexDistribution dist;
};

struct NamedGraph {
  std::string name;
  BoundedDegreeGraph graph;
};

std::vector<Vertex> random_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<Vertex> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<Vertex>(i + 1);
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < n; ++i) std::swap(all[i], all[i + rng.below(n - i)]);
  return all;
}

std::vector<Vertex> random_subset(std::size_t n, std::size_t k, std::uint64_t seed) {
  auto all = random_permutation(n, seed);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

// Zipf masses placed on a random permutation of the vertices.
VertexDistribution shuffled_zipf(std::size_t n, double s, std::uint64_t seed) {
  const auto zipf = make_zipf(n, s);
  const auto z = zipf.probabilities();
  const auto order = random_permutation(n, seed);
  std::vector<double> p(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) p[order[i] - 1] = z[i];
  return VertexDistribution(p);
}

VertexDistribution two_level(std::size_t n, std::size_t heavy, double heavy_mass) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = i < heavy ? heavy_mass / static_cast<double>(heavy)
                     : (1.0 - heavy_mass) / static_cast<double>(n - heavy);
  }
  return VertexDistribution(p);
}

VertexDistribution geometric(std::size_t n, double r) {
  std::vector<double> p(n);
  double x = 1.0;
  double total = 0.0;
  for (auto& v : p) {
    v = x;
    total += x;
    x *= r;
  }
  for (auto& v : p) v /= total;
  return VertexDistribution(p);
}

BoundedDegreeGraph shuffled(const BoundedDegreeGraph& g, std::uint64_t seed) {
  return relabel(g, random_permutation(g.vertex_count(), seed));
}

// ---------------------------------------------------------------------------
// 1. One-sided error.

struct SizeClass {
  std::size_t n;
  std::vector<NamedDist> dists;
};

std::vector<NamedDist> dists_for(std::size_t n) {
  std::vector<NamedDist> out;
  if (n <= 1000) {
    out.push_back({"uniform", make_uniform(n)});
    out.push_back({"zipf1", shuffled_zipf(n, 1.0, n)});
    out.push_back({"random", make_random(n, n + 1)});
    const auto sub = random_subset(n, n / 8, n + 2);
    out.push_back({"uniform_on_n/8", make_uniform_on(n, sub)});
    out.push_back({"zipf2", make_zipf(n, 2.0)});
  } else {
    out.push_back({"uniform", make_uniform(n)});
    out.push_back({"zipf1.5", shuffled_zipf(n, 1.5, n)});
    out.push_back({"zipf2", make_zipf(n, 2.0)});
    out.push_back({"uniform_on_128", make_uniform_on(n, random_subset(n, 128, n + 2))});
    out.push_back({"point", make_point_mass(n, static_cast<Vertex>(n / 2))});
    out.push_back({"zipf3_shuffled", shuffled_zipf(n, 3.0, n + 3)});
    out.push_back({"uniform_on_512", make_uniform_on(n, random_subset(n, 512, n + 4))});
  }
  return out;
}

struct CorpusGraph {
  std::string name;
  BoundedDegreeGraph graph;
  std::size_t size_class;
  std::vector<std::size_t> dist_ids;  // indices into the class's distributions
};

Outcome criterion1() {
  constexpr double eps = 0.4;
  constexpr std::uint64_t seeds = 200;
  const std::vector<std::size_t> sizes = {64, 500, 10000};
  std::vector<SizeClass> classes;
  for (auto n : sizes) classes.push_back({n, dists_for(n)});
  const std::vector<std::size_t> all5 = {0, 1, 2, 3, 4};
  // Broad distributions on 10^4-vertex forests make the cycle tester cover
  // whole trees at its tiny inner proximity; those forests get concentrated
  // distributions to stay inside the time budget.
  const std::vector<std::size_t> concentrated = {2, 3, 4, 5, 6};

  std::vector<CorpusGraph> bip;
  std::vector<CorpusGraph> forests;
  const auto num = [](const char* prefix, std::uint64_t s) { return prefix + std::to_string(s); };
  // n = 64
  for (std::uint64_t s = 0; s < 13; ++s) bip.push_back({num("rb64_d3_", s), generate_instance({Family::random_bipartite, 64, 3, s}), 0, all5});
  for (std::uint64_t s = 0; s < 6; ++s) bip.push_back({num("rb64_d4_", s), generate_instance({Family::random_bipartite, 64, 4, 100 + s}), 0, all5});
  for (std::uint64_t s = 0; s < 3; ++s) bip.push_back({num("c64_perm", s), shuffled(make_cycle(64), s), 0, all5});
  bip.push_back({"c4x16", repeat_disjoint(make_cycle(4), 16), 0, all5});
  bip.push_back({"c8x8", repeat_disjoint(make_cycle(8), 8), 0, all5});
  bip.push_back({"c16x4_perm", shuffled(repeat_disjoint(make_cycle(16), 4), 9), 0, all5});
  for (std::uint64_t s = 0; s < 6; ++s) bip.push_back({num("forest64_", s), generate_instance({Family::forest, 64, 3, 200 + s}), 0, all5});
  bip.push_back({"path64", make_path(64), 0, all5});
  // n = 500
  for (std::uint64_t s = 0; s < 8; ++s) bip.push_back({num("rb500_d3_", s), generate_instance({Family::random_bipartite, 500, 3, 300 + s}), 1, all5});
  for (std::uint64_t s = 0; s < 3; ++s) bip.push_back({num("rb500_d5_", s), generate_instance({Family::random_bipartite, 500, 5, 400 + s}), 1, all5});
  bip.push_back({"c500", make_cycle(500), 1, all5});
  bip.push_back({"c10x50_perm", shuffled(repeat_disjoint(make_cycle(10), 50), 3), 1, all5});
  for (std::uint64_t s = 0; s < 2; ++s) bip.push_back({num("forest500_", s), generate_instance({Family::forest, 500, 3, 500 + s}), 1, all5});
  // n = 10^4
  for (std::uint64_t s = 0; s < 3; ++s) bip.push_back({num("rb10k_d3_", s), generate_instance({Family::random_bipartite, 10000, 3, 600 + s}), 2, all5});

  for (std::uint64_t s = 0; s < 36; ++s) {
    const unsigned d = 2 + static_cast<unsigned>(s % 3);
    forests.push_back({"forest64_d" + std::to_string(d) + "_" + std::to_string(s), generate_instance({Family::forest, 64, d, 800 + s}), 0, all5});
  }
  forests.push_back({"path64", make_path(64), 0, all5});
  forests.push_back({"star63", make_star(63), 0, all5});
  for (std::uint64_t s = 0; s < 8; ++s) {
    const unsigned d = 2 + static_cast<unsigned>(s % 3);
    forests.push_back({"forest500_d" + std::to_string(d) + "_" + std::to_string(s), generate_instance({Family::forest, 500, d, 900 + s}), 1, all5});
  }
  for (std::uint64_t s = 0; s < 4; ++s) forests.push_back({num("forest10k_", s), generate_instance({Family::forest, 10000, 3, 1000 + s}), 2, concentrated});

  // Ground truth for the corpus itself.
  for (const auto& g : bip) {
    if (bipartite_distance(g.graph, make_uniform(g.graph.vertex_count())).distance != 0.0) {
      return {false, g.name + " is not bipartite"};
    }
  }
  for (const auto& g : forests) {
    if (cyclefree_distance(g.graph, make_uniform(g.graph.vertex_count())).distance != 0.0) {
      return {false, g.name + " is not a forest"};
    }
  }

  // The support bound depends only on (D, eps, seed), so it is computed once
  // per distribution and seed and shared by every graph and both testers.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::uint64_t>> bounds;
  const TesterOptions defaults;
  const auto bound_for = [&](std::size_t cls, std::size_t dist, std::uint64_t seed) {
    auto& v = bounds[{cls, dist}];
    if (v.empty()) {
      for (std::uint64_t s = 0; s < seeds; ++s) {
        v.push_back(estimate_support_bound(classes[cls].dists[dist].dist, eps, s, defaults).estimate);
      }
    }
    return v[seed];
  };

  std::uint64_t runs = 0;
  std::uint64_t rejections = 0;
  std::uint64_t mismatches = 0;
  std::set<std::size_t> bip_sizes;
  std::string first_reject;
  for (const auto& g : bip) {
    const auto t0 = Clock::now();
    for (auto di : g.dist_ids) {
      const auto& d = classes[g.size_class].dists[di];
      for (std::uint64_t s = 0; s < seeds; ++s) {
        const auto v = test_bipartite_with_bound(g.graph, d.dist, eps, bound_for(g.size_class, di, s), s);
        ++runs;
        if (v.rejected()) {
          ++rejections;
          if (first_reject.empty()) first_reject = g.name + "/" + d.name + "/seed " + std::to_string(s);
        }
        if (s == 0) {  // the shared bound reproduces the self-contained tester exactly
          const auto full = test_bipartite(g.graph, d.dist, eps, s);
          if (full.decision != v.decision || full.steps != v.steps || full.support_bound != v.support_bound) ++mismatches;
        }
      }
    }
    bip_sizes.insert(g.graph.vertex_count());
    if (verbose()) std::cerr << "  bip " << g.name << " " << fmt(seconds_since(t0)) << " s\n";
  }
  const auto bip_runs = runs;
  const auto bip_rejections = rejections;

  for (const auto& g : forests) {
    const auto t0 = Clock::now();
    for (auto di : g.dist_ids) {
      const auto& d = classes[g.size_class].dists[di];
      for (std::uint64_t s = 0; s < seeds; ++s) {
        CycleTesterOptions opts;
        opts.support_bound = bound_for(g.size_class, di, s);
        const auto v = test_cycle_free(g.graph, d.dist, eps, s, opts);
        ++runs;
        if (v.rejected()) {
          ++rejections;
          if (first_reject.empty()) first_reject = g.name + "/" + d.name + "/seed " + std::to_string(s);
        }
        if (s == 0) {
          const auto full = test_cycle_free(g.graph, d.dist, eps, s);
          if (full.decision != v.decision || full.steps != v.steps || full.support_bound != v.support_bound) ++mismatches;
        }
      }
    }
    if (verbose()) std::cerr << "  cyc " << g.name << " " << fmt(seconds_since(t0)) << " s\n";
  }

  const bool shape = bip.size() >= 50 && forests.size() >= 50 && *bip_sizes.rbegin() == 10000;
  std::ostringstream s;
  s << bip.size() << " bipartite graphs x 5 dists x " << seeds << " seeds: " << bip_rejections << "/" << bip_runs
    << " rejections; " << forests.size() << " forests: " << rejections - bip_rejections << "/" << runs - bip_runs
    << " rejections; eps=" << eps << ", n up to " << *bip_sizes.rbegin() << "; shared-bound mismatches "
    << mismatches;
  if (!first_reject.empty()) s << "; first rejection " << first_reject;
  return {shape && rejections == 0 && mismatches == 0, s.str()};
}

// ---------------------------------------------------------------------------
// 2. Soundness on exactly verified far instances.

// P(X <= k) for X ~ Bin(n, p).
double binomial_cdf(std::uint64_t k, std::uint64_t n, double p) {
  double total = 0.0;
  for (std::uint64_t i = 0; i <= k; ++i) {
    const double log_term = std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(i) + 1) -
                            std::lgamma(static_cast<double>(n - i) + 1) + static_cast<double>(i) * std::log(p) +
                            static_cast<double>(n - i) * std::log1p(-p);
    total += std::exp(log_term);
  }
  return std::min(1.0, total);
}

struct FarInstance {
  std::string name;
  BoundedDegreeGraph graph;
  VertexDistribution dist;
  double eps_cap;  // eps = min(cap, distance rounded down to a multiple of 0.05)
  bool cycle;      // cycle-freeness instead of bipartiteness
};

BoundedDegreeGraph heavy_core_graph() {
  return disjoint_union(make_cycle(9), make_path(10000));
}

VertexDistribution heavy_core_dist() {
  std::vector<double> p(10009);
  for (std::size_t i = 0; i < 9; ++i) p[i] = 0.99 / 9.0;
  for (std::size_t i = 9; i < p.size(); ++i) p[i] = 0.01 / 10000.0;
  return VertexDistribution(p);
}

std::vector<FarInstance> far_corpus() {
  std::vector<FarInstance> c;
  const auto add = [&](std::string name, BoundedDegreeGraph g, VertexDistribution d, double eps, bool cycle) {
    c.push_back({std::move(name), std::move(g), std::move(d), eps, cycle});
  };
  add("C3/uniform", make_cycle(3), make_uniform(3), 0.5, false);
  add("C5/uniform", make_cycle(5), make_uniform(5), 0.3, false);
  add("C7/uniform", make_cycle(7), make_uniform(7), 0.25, false);
  add("C9/uniform", make_cycle(9), make_uniform(9), 0.2, false);
  add("C5/random", make_cycle(5), make_random(5, 11), 0.2, false);
  add("K4/uniform", make_complete(4), make_uniform(4), 0.5, false);
  add("K4/random", make_complete(4), make_random(4, 5), 0.3, false);
  add("K5/uniform", make_complete(5), make_uniform(5), 0.5, false);
  add("petersen/uniform", make_petersen(), make_uniform(10), 0.3, false);
  add("petersen/zipf0.5", make_petersen(), make_zipf(10, 0.5), 0.3, false);
  add("20xC3/uniform", repeat_disjoint(make_cycle(3), 20), make_uniform(60), 0.5, false);
  add("10xC5/uniform", repeat_disjoint(make_cycle(5), 10), make_uniform(50), 0.3, false);
  add("cubic16/uniform", generate_instance({Family::random_d_regular, 16, 3, 1}), make_uniform(16), 0.2, false);
  add("cubic20/zipf1", generate_instance({Family::random_d_regular, 20, 3, 2}), make_zipf(20, 1.0), 0.2, false);
  add("triangles+forest30/uniform", generate_instance({Family::cycles_plus_forest, 30, 3, 4}), make_uniform(30), 0.2, false);
  add("C9+path10k/heavy-core", heavy_core_graph(), heavy_core_dist(), 0.2, false);
  add("C3/uniform", make_cycle(3), make_uniform(3), 0.5, true);
  add("C4/uniform", make_cycle(4), make_uniform(4), 0.5, true);
  add("C6/uniform", make_cycle(6), make_uniform(6), 0.3, true);
  add("K4/uniform", make_complete(4), make_uniform(4), 0.5, true);
  add("petersen/uniform", make_petersen(), make_uniform(10), 0.5, true);
  add("20xC3/uniform", repeat_disjoint(make_cycle(3), 20), make_uniform(60), 0.3, true);
  add("triangles+forest30/uniform", generate_instance({Family::cycles_plus_forest, 30, 3, 4}), make_uniform(30), 0.2, true);
  add("cubic16/uniform", generate_instance({Family::random_d_regular, 16, 3, 1}), make_uniform(16), 0.5, true);
  return c;
}

double true_distance(const FarInstance& f, std::string& method) {
  const auto r = f.cycle ? cyclefree_distance(f.graph, f.dist) : bipartite_distance(f.graph, f.dist);
  method = to_string(r.method);
  return r.distance;
}

Outcome criterion2() {
  constexpr std::uint64_t trials = 300;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst_rate = 1.0;
  std::string worst;
  std::ostringstream notes;
  for (const auto& f : far_corpus()) {
    std::string method;
    const double distance = true_distance(f, method);
    const double eps = std::min(f.eps_cap, std::floor(distance * 20.0 + 1e-9) / 20.0);
    if (eps < 0.1 || distance < eps) return {false, f.name + ": distance " + fmt(distance) + " too small"};
    ++instances;
    const auto t0 = Clock::now();
    std::uint64_t rejects = 0;
    for (std::uint64_t s = 0; s < trials; ++s) {
      const auto v = f.cycle ? test_cycle_free(f.graph, f.dist, eps, s) : test_bipartite(f.graph, f.dist, eps, s);
      rejects += v.rejected() ? 1 : 0;
    }
    const double rate = static_cast<double>(rejects) / trials;
    const double p = binomial_cdf(rejects, trials, 2.0 / 3.0);
    if (rate < 2.0 / 3.0 && p < 0.01) {
      ++failures;
      notes << " " << f.name << " rate " << fmt(rate) << ";";
    }
    if (rate < worst_rate) {
      worst_rate = rate;
      worst = std::string(f.cycle ? "cycle-free " : "bipartite ") + f.name;
    }
    if (verbose()) {
      std::cerr << "  " << (f.cycle ? "cyc " : "bip ") << f.name << " dist " << fmt(distance) << " (" << method
                << ") eps " << eps << " rate " << fmt(rate) << " " << fmt(seconds_since(t0)) << " s\n";
    }
  }
  std::ostringstream s;
  s << instances << " far instances x " << trials << " trials; lowest rejection rate " << fmt(worst_rate) << " ("
    << worst << "); binomial failures " << failures << notes.str();
  return {instances >= 20 && failures == 0, s.str()};
}

// ---------------------------------------------------------------------------
// 3. Query scaling of test_bipartite_with_bound.

Outcome criterion3() {
  constexpr double eps = 0.3;
  constexpr std::uint64_t trials = 50;
  const std::vector<std::size_t> sizes = {1000, 4000, 16000};
  TesterOptions opts;
  opts.stop_when_saturated = false;  // full walk schedule; raw counts are what an unmemoized walker issues
  std::vector<std::uint64_t> raw_median;
  std::vector<std::uint64_t> memo_median;
  for (auto n : sizes) {
    const auto g = generate_instance({Family::random_bipartite, n, 3, 42});
    const auto d = make_uniform(n);
    std::vector<std::uint64_t> raw;
    std::vector<std::uint64_t> memo;
    for (std::uint64_t s = 0; s < trials; ++s) {
      const auto v = test_bipartite_with_bound(g, d, eps, n, s, opts);
      raw.push_back(v.raw_queries.total());
      memo.push_back(v.queries.total());
    }
    std::sort(raw.begin(), raw.end());
    std::sort(memo.begin(), memo.end());
    raw_median.push_back(raw[(raw.size() - 1) / 2]);
    memo_median.push_back(memo[(memo.size() - 1) / 2]);
  }
  bool pass = true;
  std::ostringstream s;
  s << "median raw queries";
  for (std::size_t i = 0; i < sizes.size(); ++i) s << " n=" << sizes[i] << ":" << raw_median[i];
  s << "; growth";
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    const double r = static_cast<double>(raw_median[i]) / static_cast<double>(raw_median[i - 1]);
    pass = pass && r <= 3.0;
    s << " " << fmt(r, 3);
  }
  s << " (bound 3.0); memoized distinct queries";
  for (std::size_t i = 0; i < sizes.size(); ++i) s << " " << memo_median[i];
  return {pass, s.str()};
}

// ---------------------------------------------------------------------------
// 4. Estimator bracket.

std::vector<NamedDist> estimator_corpus() {
  std::vector<NamedDist> c;
  c.push_back({"uniform1000", make_uniform(1000)});
  c.push_back({"uniform64", make_uniform(64)});
  c.push_back({"zipf500_1", make_zipf(500, 1.0)});
  c.push_back({"zipf2000_1.5", make_zipf(2000, 1.5)});
  c.push_back({"random300", make_random(300, 7)});
  c.push_back({"random5000", make_random(5000, 8)});
  c.push_back({"uniform_on_3_of_100", make_uniform_on(100, random_subset(100, 3, 4))});
  c.push_back({"two_level_10_990", two_level(1000, 10, 0.5)});
  c.push_back({"geometric200_0.97", geometric(200, 0.97)});
  c.push_back({"uniform_on_250_of_5000", make_uniform_on(5000, random_subset(5000, 250, 3))});
  return c;
}

Outcome criterion4() {
  constexpr std::uint64_t runs = 200;
  const std::vector<std::pair<double, double>> params = {{0.1, 1.25}, {0.1, 1.5}, {0.05, 1.5}};
  double worst = 1.0;
  std::string worst_name;
  std::size_t cells = 0;
  for (const auto& d : estimator_corpus()) {
    for (auto [eta, beta] : params) {
      const auto lo = exact_effective_support_size(d.dist, std::pow(beta, 5) * eta);
      const auto hi = beta * beta * static_cast<double>(exact_effective_support_size(d.dist, eta / beta));
      EstimatorParams p;
      p.eta = eta;
      p.beta = beta;
      std::uint64_t inside = 0;
      for (std::uint64_t s = 0; s < runs; ++s) {
        const auto e = refined_estimate(d.dist, p, s).estimate;
        inside += (e >= lo && static_cast<double>(e) <= hi) ? 1 : 0;
      }
      const double frac = static_cast<double>(inside) / runs;
      ++cells;
      if (frac <= worst) {
        worst = frac;
        worst_name = d.name + " (eta " + fmt(eta) + ", beta " + fmt(beta) + ", bracket [" + std::to_string(lo) + ", " +
                     fmt(hi, 8) + "])";
      }
      if (verbose()) {
        std::cerr << "  " << d.name << " eta " << eta << " beta " << beta << " [" << lo << ", " << hi << "] " << frac
                  << "\n";
      }
    }
  }
  // Reported only: a single atom always yields ceil(0.9 sqrt(beta)) = 2 at
  // beta = 1.25, one more than the bracket [1, beta^2] admits.
  EstimatorParams tight;
  tight.beta = 1.25;
  std::uint64_t point_inside = 0;
  for (std::uint64_t s = 0; s < runs; ++s) {
    point_inside += refined_estimate(make_point_mass(100, 37), tight, s).estimate == 1 ? 1 : 0;
  }
  std::ostringstream s;
  s << cells << " (distribution, eta, beta) cells x " << runs << " runs; lowest in-bracket fraction " << fmt(worst)
    << " at " << worst_name << " (need >= 0.9); note: point mass at (0.1, 1.25) in bracket "
    << fmt(static_cast<double>(point_inside) / runs) << ", not counted";
  return {cells >= 30 && worst >= 0.9, s.str()};
}

// ---------------------------------------------------------------------------
// 5. Estimator query complexity.

Outcome criterion5() {
  constexpr double eta = 0.1;
  constexpr std::uint64_t runs = 21;
  std::vector<double> c;
  std::ostringstream s;
  s << "median queries";
  for (unsigned k : {8U, 12U, 16U}) {
    const std::size_t n = std::size_t{1} << k;
    const auto d = make_uniform(n);
    EstimatorParams p;
    p.eta = eta;
    std::vector<std::uint64_t> q;
    for (std::uint64_t seed = 0; seed < runs; ++seed) q.push_back(refined_estimate(d, p, seed).queries.total());
    std::sort(q.begin(), q.end());
    const double median = static_cast<double>(q[runs / 2]);
    const double log_n = static_cast<double>(k);
    c.push_back(median / (log_n * std::log2(log_n) / eta));
    s << " n=2^" << k << ":" << q[runs / 2];
  }
  const double spread = *std::max_element(c.begin(), c.end()) / *std::min_element(c.begin(), c.end());
  s << "; fitted c";
  for (double x : c) s << " " << fmt(x);
  s << "; max/min " << fmt(spread, 3) << " (bound 3)";
  return {spread <= 3.0, s.str()};
}

// ---------------------------------------------------------------------------
// 6. Trimming contract.

Outcome criterion6() {
  std::vector<NamedDist> all;
  for (auto n : {64UL, 500UL, 10000UL}) {
    for (auto& d : dists_for(n)) all.push_back({d.name + "/" + std::to_string(n), std::move(d.dist)});
  }
  for (auto& d : estimator_corpus()) all.push_back(std::move(d));
  for (auto& f : far_corpus()) all.push_back({f.name, std::move(f.dist)});
  for (unsigned k : {8U, 12U, 16U}) all.push_back({"uniform2^" + std::to_string(k), make_uniform(std::size_t{1} << k)});

  std::size_t checks = 0;
  double worst_tv_slack = -1.0;
  double worst_ratio = 0.0;
  for (const auto& d : all) {
    for (double eta : {0.01, 0.05, 0.1, 0.2, 0.4}) {
      const auto exact = exact_effective_support_size(d.dist, eta);
      for (std::uint64_t bound : {exact, exact * 2, static_cast<std::uint64_t>(d.dist.vertex_count())}) {
        const auto t = trim(d.dist, eta, bound);
        ++checks;
        const double tv = t.tv_to_base();
        if (tv > 2 * eta) return {false, d.name + ": TV " + fmt(tv, 17) + " > 2 eta at eta " + fmt(eta)};
        worst_tv_slack = std::max(worst_tv_slack, tv / (2 * eta));
        const double floor = eta / static_cast<double>(bound);
        double ref = -1.0;
        for (Vertex v = 1; v <= d.dist.vertex_count(); ++v) {
          const double p = t.probability(v);
          const double base = d.dist.probability(v);
          if (p == 0.0) {
            if (base > floor) return {false, d.name + ": dropped an atom above the threshold"};
            continue;
          }
          if (!(p > floor)) return {false, d.name + ": kept atom not above eta/n"};
          if (!(base > floor)) return {false, d.name + ": kept an atom below the threshold"};
          const double ratio = p / base;
          if (ref < 0) ref = ratio;
          worst_ratio = std::max(worst_ratio, std::abs(ratio / ref - 1.0));
        }
      }
    }
  }
  std::ostringstream s;
  s << all.size() << " distributions, " << checks << " (eta, bound) trims; max TV/(2 eta) " << fmt(worst_tv_slack)
    << "; max relative ratio deviation " << fmt(worst_ratio, 3) << " (tolerance 1e-12)";
  return {worst_ratio <= 1e-12, s.str()};
}

// ---------------------------------------------------------------------------
// 7. Weighted walk vs explicit multigraph.

Outcome criterion7() {
  constexpr std::uint64_t scale = 1'000'000;
  constexpr std::uint64_t samples = 100'000;
  std::vector<NamedGraph> graphs = {
      {"cubic50", generate_instance({Family::random_d_regular, 50, 3, 3})},
      {"rb100_d4", generate_instance({Family::random_bipartite, 100, 4, 5})},
      {"C30", make_cycle(30)},
      {"petersen", make_petersen()},
      {"forest80", generate_instance({Family::forest, 80, 3, 6})},
      {"K5", make_complete(5)},
  };
  std::size_t triples = 0;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& g : graphs) {
    const auto n = g.graph.vertex_count();
    const std::vector<NamedDist> dists = {{"uniform", make_uniform(n)},
                                          {"zipf1.5", make_zipf(n, 1.5)},
                                          {"random", make_random(n, n)},
                                          {"zipf2_shuffled", shuffled_zipf(n, 2.0, 3 * n)}};
    for (const auto& d : dists) {
      const auto bound = exact_effective_support_size(d.dist, 0.1);
      const auto trimmed = trim(d.dist, 0.1, bound).materialize();
      const auto mm = build_mental_multigraph(g.graph, trimmed, scale);
      // Heaviest retained vertex and the lightest one of positive degree.
      Vertex heavy = 0;
      Vertex light = 0;
      for (Vertex v : mm.retained) {
        if (g.graph.degree(v) == 0) continue;
        if (heavy == 0 || trimmed.probability(v) > trimmed.probability(heavy)) heavy = v;
        if (light == 0 || mm.multidegree[v] < mm.multidegree[light]) light = v;
      }
      for (Vertex v : std::set<Vertex>{heavy, light}) {
        if (v == 0) continue;
        const double tv = walk_equivalence_check(g.graph, trimmed, scale, v, samples, 1000 + triples);
        ++triples;
        if (tv > worst) {
          worst = tv;
          worst_name = g.name + "/" + d.name + "/v" + std::to_string(v);
        }
      }
    }
  }
  std::ostringstream s;
  s << triples << " (graph, trimmed D, vertex) triples at N=" << scale << ", " << samples << " samples; max TV "
    << fmt(worst) << " at " << worst_name << " (bound 0.02)";
  return {triples >= 20 && worst <= 0.02, s.str()};
}

// ---------------------------------------------------------------------------
// 8 and 9. Small-graph corpus.

std::vector<NamedGraph> small_graphs() {
  std::vector<NamedGraph> c;
  for (std::size_t k = 3; k <= 16; ++k) c.push_back({"C" + std::to_string(k), make_cycle(k)});
  for (std::size_t k : {2UL, 5UL, 10UL, 17UL}) c.push_back({"P" + std::to_string(k), make_path(k)});
  c.push_back({"star8", make_star(8)});
  c.push_back({"K4", make_complete(4)});
  c.push_back({"K5", make_complete(5)});
  c.push_back({"petersen", make_petersen()});
  c.push_back({"2xC5", repeat_disjoint(make_cycle(5), 2)});
  c.push_back({"K4+C5", disjoint_union(make_complete(4), make_cycle(5))});
  c.push_back({"C3+P6", disjoint_union(make_cycle(3), make_path(6))});
  c.push_back({"4xC3", repeat_disjoint(make_cycle(3), 4)});
  for (std::uint64_t s = 0; s < 3; ++s) c.push_back({"cubic8_" + std::to_string(s), generate_instance({Family::random_d_regular, 8, 3, s})});
  for (std::uint64_t s = 0; s < 2; ++s) c.push_back({"cubic10_" + std::to_string(s), generate_instance({Family::random_d_regular, 10, 3, 10 + s})});
  for (std::uint64_t s = 0; s < 3; ++s) c.push_back({"rb12_" + std::to_string(s), generate_instance({Family::random_bipartite, 12, 3, 20 + s})});
  for (std::uint64_t s = 0; s < 3; ++s) c.push_back({"forest16_" + std::to_string(s), generate_instance({Family::forest, 16, 3, 30 + s})});
  c.push_back({"tri+forest12", generate_instance({Family::cycles_plus_forest, 12, 3, 40})});
  c.push_back({"tri+forest18", generate_instance({Family::cycles_plus_forest, 18, 3, 41})});
  return c;
}

std::vector<NamedDist> small_dists(std::size_t n, std::uint64_t salt) {
  return {{"uniform", make_uniform(n)}, {"zipf1", make_zipf(n, 1.0)}, {"random", make_random(n, 77 + salt)}};
}

Outcome criterion8() {
  std::size_t forest_checks = 0;
  std::size_t bip_checks = 0;
  std::uint64_t salt = 0;
  for (const auto& g : small_graphs()) {
    ++salt;
    for (const auto& d : small_dists(g.graph.vertex_count(), salt)) {
      if (g.graph.edge_count() <= 16) {
        const auto exact = cyclefree_distance(g.graph, d.dist);
        const auto brute = exhaustive_cyclefree_distance(g.graph, d.dist);
        if (exact.distance != brute.distance) {
          return {false, g.name + "/" + d.name + ": forest " + fmt(exact.distance, 17) + " vs exhaustive " +
                             fmt(brute.distance, 17)};
        }
        ++forest_checks;
      }
      const auto bip = bipartite_distance(g.graph, d.dist);
      const auto gen = gen2col_distance(g.graph, all_neq_labels(g.graph), d.dist);
      if (bip.distance != gen.distance) {
        return {false, g.name + "/" + d.name + ": bipartite " + fmt(bip.distance, 17) + " vs gen2col " +
                           fmt(gen.distance, 17)};
      }
      ++bip_checks;
    }
  }
  // Larger bipartite checks: components up to 24 vertices.
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto g = generate_instance({Family::random_d_regular, 20, 3, 50 + s});
    const auto d = make_random(20, 60 + s);
    if (bipartite_distance(g, d).distance != gen2col_distance(g, all_neq_labels(g), d).distance) {
      return {false, "cubic20_" + std::to_string(s) + ": bipartite vs gen2col differ"};
    }
    ++bip_checks;
  }
  std::ostringstream s;
  s << forest_checks << " exact-forest vs exhaustive checks (|E| <= 16) and " << bip_checks
    << " bipartite vs all-neq gen2col checks, all exactly equal";
  return {forest_checks > 0 && bip_checks > 0, s.str()};
}

Outcome criterion9() {
  std::size_t far = 0;
  double worst = 1.0;
  std::string worst_name;
  std::uint64_t salt = 0;
  for (const auto& g : small_graphs()) {
    ++salt;
    if (g.graph.edge_count() > 16) continue;
    for (const auto& d : small_dists(g.graph.vertex_count(), salt)) {
      const double distance = cyclefree_distance(g.graph, d.dist).distance;
      if (distance <= 0.0) continue;
      // The strictest proximity under which the instance is far.
      const double eps = std::min(distance, 0.99);
      const auto stats = reduction_gap_experiment(g.graph, d.dist, eps);
      ++far;
      if (stats.fraction_far < worst) {
        worst = stats.fraction_far;
        worst_name = g.name + "/" + d.name;
      }
    }
  }
  const double c3 = reduction_gap_experiment(make_cycle(3), make_uniform(3), 0.5).fraction_far;
  const double c5 = reduction_gap_experiment(make_cycle(5), make_uniform(5), 0.3).fraction_far;
  std::ostringstream s;
  s << far << " far (graph, D) instances with eps = min(distance, 0.99); lowest far-labeling fraction " << fmt(worst)
    << " at " << worst_name << " (need >= 0.2); C3 " << c3 << ", C5 " << c5 << " (need 0.5)";
  return {far > 0 && worst >= 0.2 && c3 == 0.5 && c5 == 0.5, s.str()};
}

// ---------------------------------------------------------------------------
// 10. CLI determinism.

struct Run {
  int code = -1;
  std::string out;
};

Run shell(const std::string& cmd) {
  Run r;
  FILE* p = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t k; (k = std::fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, k);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Outcome criterion10() {
  const std::string bin = VDF_TESTER_BIN;
  const fs::path samples = VDF_SAMPLES_DIR;
  const auto work = fs::temp_directory_path() / ("vdf_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);
  const auto S = [&](const char* f) { return (samples / f).string(); };

  // {command, files it writes (relative to the run directory)}
  struct Invocation {
    std::string cmd;
    std::vector<std::string> outputs;
  };
  const std::vector<Invocation> invocations = {
      {"generate --family random_bipartite --size 300 --degree 3 --seed 5 --out {}/g.graph", {"g.graph"}},
      {"generate --family cycles_plus_forest --size 40 --degree 3 --seed 2", {}},
      {"generate-dist --n 300 --kind random --seed 3 --out {}/d.dist", {"d.dist"}},
      {"generate-dist --n 300 --kind zipf --s 1.2", {}},
      {"test-bipartite --graph " + S("c5.graph") + " --dist " + S("c5_uniform.dist") + " --eps 0.3 --seed 7 --trials 5", {}},
      {"test-bipartite --graph " + S("bipartite200.graph") + " --dist " + S("zipf200.dist") + " --eps 0.3 --seed 1 --trials 3", {}},
      {"test-bipartite --graph " + S("bipartite200.graph") + " --dist " + S("zipf200.dist") + " --eps 0.3 --seed 1 --trials 2 --support-bound 50 --no-saturate --schedule 2 1 1 1 1", {}},
      {"test-cycle-free --graph " + S("forest60.graph") + " --dist " + S("random60.dist") + " --eps 0.3 --seed 7 --trials 3", {}},
      {"test-cycle-free --graph " + S("triangles_forest30.graph") + " --dist " + S("uniform30.dist") + " --eps 0.3 --seed 2 --trials 3 --reps 2", {}},
      {"estimate-support --dist " + S("zipf200.dist") + " --eta 0.1 --seed 4", {}},
      {"estimate-support --dist " + S("zipf200.dist") + " --eta 0.1 --seed 4 --mode rough", {}},
      {"oracle --graph " + S("c5.graph") + " --dist " + S("c5_uniform.dist") + " --property bipartite", {}},
      {"oracle --graph " + S("triangles_forest30.graph") + " --dist " + S("uniform30.dist") + " --property cyclefree", {}},
      {"oracle --graph " + S("c4.graph") + " --dist " + S("c4_uniform.dist") + " --property 2col --labels " + S("c4_one_neq.labels"), {}},
      {"run --config " + S("experiment.json") + " --out {}/report", {"report/report.csv", "report/report.json"}},
      {"run --config " + S("experiment.json") + " --out {}/report_j3 --jobs 3", {"report_j3/report.csv", "report_j3/report.json"}},
  };

  const auto expand = [](std::string cmd, const fs::path& dir) {
    for (auto pos = cmd.find("{}"); pos != std::string::npos; pos = cmd.find("{}")) cmd.replace(pos, 2, dir.string());
    return cmd;
  };
  std::size_t identical = 0;
  std::vector<std::string> diffs;
  for (std::size_t i = 0; i < invocations.size(); ++i) {
    std::array<Run, 2> runs;
    std::array<std::vector<std::string>, 2> files;
    for (int r = 0; r < 2; ++r) {
      const auto dir = work / ("run" + std::to_string(r)) / std::to_string(i);
      fs::create_directories(dir);
      runs[r] = shell(bin + " " + expand(invocations[i].cmd, dir));
      for (const auto& f : invocations[i].outputs) {
        try {
          files[r].push_back(read_file(dir / f));
        } catch (const std::exception&) {
          files[r].push_back("<missing>");
        }
      }
    }
    const bool ok = runs[0].code == 0 && runs[0].code == runs[1].code && runs[0].out == runs[1].out &&
                    files[0] == files[1] && (!runs[0].out.empty() || !invocations[i].outputs.empty());
    if (ok) {
      ++identical;
    } else {
      diffs.push_back(invocations[i].cmd.substr(0, invocations[i].cmd.find(' ')) + " (exit " +
                      std::to_string(runs[0].code) + ")");
    }
  }
  // jobs must not change the report either
  bool jobs_equal = false;
  try {
    jobs_equal = read_file(work / "run0" / "14" / "report" / "report.csv") ==
                     read_file(work / "run0" / "15" / "report_j3" / "report.csv") &&
                 read_file(work / "run0" / "14" / "report" / "report.json") ==
                     read_file(work / "run0" / "15" / "report_j3" / "report.json");
  } catch (const std::exception&) {
  }
  fs::remove_all(work);
  std::ostringstream s;
  s << identical << "/" << invocations.size() << " CLI invocations byte-identical across two runs; jobs=1 vs jobs=3 "
    << (jobs_equal ? "identical" : "DIFFER");
  for (const auto& d : diffs) s << "; mismatch: " << d;
  return {identical == invocations.size() && jobs_equal, s.str()};
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;  // 0 = no runtime bound
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "one-sided error", 600, criterion1},
      {2, "soundness at 2/3 on verified far instances", 1200, criterion2},
      {3, "sqrt(n) query scaling", 900, criterion3},
      {4, "estimator bracket", 600, criterion4},
      {5, "estimator query complexity", 0, criterion5},
      {6, "trimming contract", 0, criterion6},
      {7, "mental multigraph equivalence", 0, criterion7},
      {8, "oracle cross-validation", 0, criterion8},
      {9, "reduction gap", 0, criterion9},
      {10, "CLI determinism", 0, criterion10},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    const bool in_time = c.budget_s == 0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " | " << o.detail << " | "
              << fmt(secs, 4) << " s";
    if (c.budget_s > 0) std::cout << " (limit " << c.budget_s << " s" << (in_time ? "" : ", EXCEEDED") << ")";
    std::cout << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
