#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "vdf/cycle_tester.hpp"
#include "vdf/distribution.hpp"
#include "vdf/generators.hpp"
#include "vdf/graph.hpp"
#include "vdf/support_estimator.hpp"
#include "vdf/walk_tester.hpp"

namespace vdf {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
}

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

// ---------------------------------------------------------------------------
// Verdict serialization shared by the CLI and the harness.

inline Json to_json(const QueryCounters& q) {
  return Json{{"sample", q.sample}, {"eval", q.eval}, {"graph", q.graph}, {"total", q.total()}};
}

inline Json to_json(const ParityWitness& w) {
  Json out = Json::array();
  for (const auto& e : w) out.push_back(Json{{"u", e.u}, {"v", e.v}, {"label", e.parity ? "neq" : "eq"}});
  return out;
}

inline Json to_json(const Verdict& v) {
  Json j;
  j["decision"] = to_string(v.decision);
  j["witness"] = to_json(v.witness);
  j["queries"] = to_json(v.queries);
  j["raw_queries"] = to_json(v.raw_queries);
  j["estimator_queries"] = to_json(v.estimator_queries);
  j["support_bound"] = v.support_bound;
  j["estimate"] = v.estimate ? Json(*v.estimate) : Json(nullptr);
  j["params"] = Json{{"starts", v.params.starts},
                     {"walks_per_start", v.params.walks_per_start},
                     {"walk_length", v.params.walk_length}};
  j["starts_used"] = v.starts_used;
  j["walks"] = v.walks;
  j["steps"] = v.steps;
  j["no_start_vertex"] = v.no_start_vertex;
  return j;
}

// ---------------------------------------------------------------------------
// Configuration.

enum class TesterId { bipartite, bipartite_bound, cycle_free, estimate_support };

inline const char* to_string(TesterId t) {
  switch (t) {
    case TesterId::bipartite: return "bipartite";
    case TesterId::bipartite_bound: return "bipartite_bound";
    case TesterId::cycle_free: return "cycle_free";
    case TesterId::estimate_support: return "estimate_support";
  }
  return "bipartite";
}

inline TesterId tester_from_string(const std::string& s) {
  for (auto t : {TesterId::bipartite, TesterId::bipartite_bound, TesterId::cycle_free,
                 TesterId::estimate_support}) {
    if (s == to_string(t)) return t;
  }
  throw UsageError("unknown tester '" + s + "'");
}

struct GraphSource {
  std::optional<std::filesystem::path> file;
  InstanceFamily family;
};

struct DistSource {
  std::optional<std::filesystem::path> file;
  std::string kind = "uniform";  // uniform | zipf | point | random
  double zipf_s = 1.0;
  Vertex point = 1;
  std::uint64_t seed = 0;
};

struct CellSpec {
  std::string id;
  GraphSource graph;
  DistSource dist;
  TesterId tester = TesterId::bipartite;
  double eps = 0.3;
  std::uint64_t trials = 1;
  std::uint64_t seed_base = 0;
  std::optional<std::uint64_t> support_bound;
  // estimate_support only
  double eta = 0.1;
  double beta = 1.5;
  bool rough = false;
  CycleTesterOptions options;  // options.inner drives the bipartite testers too
};

struct ExperimentConfig {
  std::vector<CellSpec> cells;
  unsigned jobs = 1;
  bool timing = false;  // record wall_ms; off keeps reports byte-reproducible
};

namespace detail {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

inline void read_schedule(const Json& j, WalkSchedule& s) {
  s.a = get_or(j, "a", s.a);
  s.b = get_or(j, "b", s.b);
  s.c = get_or(j, "c", s.c);
  s.e = get_or(j, "e", s.e);
  s.f = get_or(j, "f", s.f);
}

}  // namespace detail

/// Parses the JSON config. Relative file paths resolve against base_dir.
/// Any structural problem is a UsageError (a config error).
inline ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("cells") || !root["cells"].is_array()) {
    throw UsageError("config needs a \"cells\" array");
  }
  ExperimentConfig cfg;
  cfg.jobs = detail::get_or(root, "jobs", 1U);
  cfg.timing = detail::get_or(root, "timing", false);
  std::size_t index = 0;
  for (const Json& c : root["cells"]) {
    CellSpec cell;
    cell.id = detail::get_or(c, "id", "cell" + std::to_string(index));
    ++index;
    if (!c.contains("graph") || !c.contains("dist")) {
      throw UsageError("cell '" + cell.id + "' needs \"graph\" and \"dist\"");
    }
    const Json& g = c["graph"];
    if (g.contains("file")) {
      cell.graph.file = base_dir / g["file"].get<std::string>();
    } else if (g.contains("family")) {
      cell.graph.family.family = family_from_string(g["family"].get<std::string>());
      cell.graph.family.size = detail::get_or<std::size_t>(g, "size", 0);
      cell.graph.family.degree_bound = detail::get_or(g, "degree", 2U);
      cell.graph.family.seed = detail::get_or<std::uint64_t>(g, "seed", 0);
    } else {
      throw UsageError("cell '" + cell.id + "': graph needs \"file\" or \"family\"");
    }
    const Json& d = c["dist"];
    if (d.contains("file")) {
      cell.dist.file = base_dir / d["file"].get<std::string>();
    } else {
      cell.dist.kind = detail::get_or<std::string>(d, "kind", "uniform");
      if (cell.dist.kind != "uniform" && cell.dist.kind != "zipf" && cell.dist.kind != "point" &&
          cell.dist.kind != "random") {
        throw UsageError("cell '" + cell.id + "': unknown distribution kind '" + cell.dist.kind + "'");
      }
      cell.dist.zipf_s = detail::get_or(d, "s", 1.0);
      cell.dist.point = detail::get_or<Vertex>(d, "vertex", 1);
      cell.dist.seed = detail::get_or<std::uint64_t>(d, "seed", 0);
    }
    cell.tester = tester_from_string(detail::get_or<std::string>(c, "tester", "bipartite"));
    cell.eps = detail::get_or(c, "eps", cell.eps);
    cell.trials = detail::get_or<std::uint64_t>(c, "trials", 1);
    cell.seed_base = detail::get_or<std::uint64_t>(c, "seed_base", 0);
    if (c.contains("support_bound")) cell.support_bound = c["support_bound"].get<std::uint64_t>();
    cell.eta = detail::get_or(c, "eta", cell.eta);
    cell.beta = detail::get_or(c, "beta", cell.beta);
    cell.rough = detail::get_or<std::string>(c, "mode", "refined") == "rough";
    cell.options.kappa = detail::get_or(c, "kappa", cell.options.kappa);
    cell.options.reps = detail::get_or(c, "reps", cell.options.reps);
    cell.options.inner.stop_when_saturated = detail::get_or(c, "saturate", true);
    if (c.contains("schedule")) detail::read_schedule(c["schedule"], cell.options.inner.schedule);

    if (cell.trials < 1) throw UsageError("cell '" + cell.id + "': trials must be >= 1");
    if (cell.tester != TesterId::estimate_support && !(cell.eps > 0.0 && cell.eps < 1.0)) {
      throw UsageError("cell '" + cell.id + "': eps must lie in (0, 1)");
    }
    if (cell.tester == TesterId::bipartite_bound && !cell.support_bound) {
      throw UsageError("cell '" + cell.id + "': bipartite_bound needs support_bound");
    }
    cfg.cells.push_back(std::move(cell));
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Reports.

struct TrialRow {
  std::string cell_id;
  std::uint64_t trial = 0;
  std::string decision;  // accept | reject | estimate | error
  std::uint64_t sample_q = 0;
  std::uint64_t eval_q = 0;
  std::uint64_t graph_q = 0;
  double wall_ms = 0.0;
  std::uint64_t witness_len = 0;
  std::optional<std::uint64_t> estimate_n;
  std::string error;

  std::uint64_t total_q() const { return sample_q + eval_q + graph_q; }
  friend bool operator==(const TrialRow&, const TrialRow&) = default;
};

struct CellAggregate {
  std::string cell_id;
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  std::uint64_t rejections = 0;
  double rejection_rate = 0.0;  // over non-error trials
  std::uint64_t median_total_q = 0;
  std::uint64_t p95_total_q = 0;
  std::optional<std::uint64_t> median_estimate;

  friend bool operator==(const CellAggregate&, const CellAggregate&) = default;
};

struct ExperimentReport {
  std::vector<TrialRow> rows;
  std::vector<CellAggregate> aggregates;

  bool all_completed() const {
    return std::none_of(rows.begin(), rows.end(), [](const TrialRow& r) { return r.decision == "error"; });
  }
  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

namespace detail {

// Lower median and nearest-rank 95th percentile; integer results.
inline std::uint64_t lower_median(std::vector<std::uint64_t> xs) {
  std::sort(xs.begin(), xs.end());
  return xs[(xs.size() - 1) / 2];
}

inline std::uint64_t nearest_rank(std::vector<std::uint64_t> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size())));
  return xs[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace detail

/// Aggregates in first-appearance order of cell ids.
inline std::vector<CellAggregate> compute_aggregates(const std::vector<TrialRow>& rows) {
  std::vector<CellAggregate> out;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.cell_id) == order.end()) order.push_back(r.cell_id);
  }
  for (const auto& id : order) {
    CellAggregate a;
    a.cell_id = id;
    std::vector<std::uint64_t> totals;
    std::vector<std::uint64_t> estimates;
    for (const auto& r : rows) {
      if (r.cell_id != id) continue;
      ++a.trials;
      if (r.decision == "error") {
        ++a.errors;
        continue;
      }
      if (r.decision == "reject") ++a.rejections;
      totals.push_back(r.total_q());
      if (r.estimate_n) estimates.push_back(*r.estimate_n);
    }
    if (!totals.empty()) {
      a.rejection_rate = static_cast<double>(a.rejections) / static_cast<double>(totals.size());
      a.median_total_q = detail::lower_median(totals);
      a.p95_total_q = detail::nearest_rank(totals, 0.95);
    }
    if (!estimates.empty()) a.median_estimate = detail::lower_median(estimates);
    out.push_back(std::move(a));
  }
  return out;
}

/// Self-consistency: stored aggregates equal a recomputation from the rows.
inline bool aggregates_consistent(const ExperimentReport& report) {
  return report.aggregates == compute_aggregates(report.rows);
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

// Splits one CSV line honoring double-quoted fields.
inline std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        out.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else {
      out.back() += ch;
    }
  }
  return out;
}

inline std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  const auto v = parse_number<std::uint64_t>(s);
  if (!v) throw ParseError(line, "expected an unsigned integer, got '" + s + "'");
  return *v;
}

inline double parse_f64(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError(line, "expected a number, got '" + s + "'");
  }
  return v;
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "cell_id,trial,decision,sample_q,eval_q,graph_q,wall_ms,witness_len,estimate_n";
inline constexpr const char* kAggregateHeader =
    "cell_id,trials,errors,rejections,rejection_rate,median_total_q,p95_total_q,median_estimate";
inline constexpr const char* kErrorHeader = "cell_id,trial,message";

/// CSV layout: the per-trial table; then, if there are rows, a "# aggregates"
/// block; then, if any trial failed, a "# errors" block with diagnostics.
inline std::string emit_csv(const ExperimentReport& report) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : report.rows) {
    out += detail::csv_quote(r.cell_id) + "," + std::to_string(r.trial) + "," + r.decision + "," +
           std::to_string(r.sample_q) + "," + std::to_string(r.eval_q) + "," +
           std::to_string(r.graph_q) + "," + format_double(r.wall_ms) + "," +
           std::to_string(r.witness_len) + "," +
           (r.estimate_n ? std::to_string(*r.estimate_n) : std::string()) + "\n";
  }
  if (!report.aggregates.empty()) {
    out += "\n# aggregates\n" + std::string(kAggregateHeader) + "\n";
    for (const auto& a : report.aggregates) {
      out += detail::csv_quote(a.cell_id) + "," + std::to_string(a.trials) + "," +
             std::to_string(a.errors) + "," + std::to_string(a.rejections) + "," +
             format_double(a.rejection_rate) + "," + std::to_string(a.median_total_q) + "," +
             std::to_string(a.p95_total_q) + "," +
             (a.median_estimate ? std::to_string(*a.median_estimate) : std::string()) + "\n";
    }
  }
  bool any_error = false;
  for (const auto& r : report.rows) {
    if (r.decision != "error") continue;
    if (!any_error) out += "\n# errors\n" + std::string(kErrorHeader) + "\n";
    any_error = true;
    out += detail::csv_quote(r.cell_id) + "," + std::to_string(r.trial) + "," + detail::csv_quote(r.error) + "\n";
  }
  return out;
}

inline ExperimentReport parse_csv(std::string_view text) {
  ExperimentReport report;
  enum class Block { trials, aggregates, errors } block = Block::trials;
  bool expect_header = true;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = detail::trim_ws(raw);
    if (line.empty()) return;
    if (line == "# aggregates") {
      block = Block::aggregates;
      expect_header = true;
      return;
    }
    if (line == "# errors") {
      block = Block::errors;
      expect_header = true;
      return;
    }
    if (expect_header) {
      const char* want = block == Block::trials ? kCsvHeader
                         : block == Block::aggregates ? kAggregateHeader : kErrorHeader;
      if (line != want) throw ParseError(line_no, "unexpected CSV header");
      expect_header = false;
      return;
    }
    const auto f = detail::csv_split(line);
    if (block == Block::trials) {
      if (f.size() != 9) throw ParseError(line_no, "expected 9 columns");
      TrialRow r;
      r.cell_id = f[0];
      r.trial = detail::parse_u64(f[1], line_no);
      r.decision = f[2];
      r.sample_q = detail::parse_u64(f[3], line_no);
      r.eval_q = detail::parse_u64(f[4], line_no);
      r.graph_q = detail::parse_u64(f[5], line_no);
      r.wall_ms = detail::parse_f64(f[6], line_no);
      r.witness_len = detail::parse_u64(f[7], line_no);
      if (!f[8].empty()) r.estimate_n = detail::parse_u64(f[8], line_no);
      report.rows.push_back(std::move(r));
    } else if (block == Block::aggregates) {
      if (f.size() != 8) throw ParseError(line_no, "expected 8 aggregate columns");
      CellAggregate a;
      a.cell_id = f[0];
      a.trials = detail::parse_u64(f[1], line_no);
      a.errors = detail::parse_u64(f[2], line_no);
      a.rejections = detail::parse_u64(f[3], line_no);
      a.rejection_rate = detail::parse_f64(f[4], line_no);
      a.median_total_q = detail::parse_u64(f[5], line_no);
      a.p95_total_q = detail::parse_u64(f[6], line_no);
      if (!f[7].empty()) a.median_estimate = detail::parse_u64(f[7], line_no);
      report.aggregates.push_back(std::move(a));
    } else {
      if (f.size() != 3) throw ParseError(line_no, "expected 3 error columns");
      const auto trial = detail::parse_u64(f[1], line_no);
      auto it = std::find_if(report.rows.begin(), report.rows.end(), [&](const TrialRow& r) {
        return r.cell_id == f[0] && r.trial == trial && r.decision == "error";
      });
      if (it == report.rows.end()) throw ParseError(line_no, "error entry without an error row");
      it->error = f[2];
    }
  });
  return report;
}

inline Json to_json(const TrialRow& r) {
  Json j{{"cell_id", r.cell_id}, {"trial", r.trial},   {"decision", r.decision},
         {"sample_q", r.sample_q}, {"eval_q", r.eval_q}, {"graph_q", r.graph_q},
         {"wall_ms", r.wall_ms}, {"witness_len", r.witness_len}};
  j["estimate_n"] = r.estimate_n ? Json(*r.estimate_n) : Json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline Json to_json(const CellAggregate& a) {
  Json j{{"cell_id", a.cell_id},       {"trials", a.trials},
         {"errors", a.errors},         {"rejections", a.rejections},
         {"rejection_rate", a.rejection_rate}, {"median_total_q", a.median_total_q},
         {"p95_total_q", a.p95_total_q}};
  j["median_estimate"] = a.median_estimate ? Json(*a.median_estimate) : Json(nullptr);
  return j;
}

inline std::string emit_json(const ExperimentReport& report) {
  Json j;
  j["rows"] = Json::array();
  for (const auto& r : report.rows) j["rows"].push_back(to_json(r));
  j["aggregates"] = Json::array();
  for (const auto& a : report.aggregates) j["aggregates"].push_back(to_json(a));
  return j.dump(2) + "\n";
}

inline ExperimentReport parse_json_report(std::string_view text) {
  const Json j = Json::parse(text);
  ExperimentReport report;
  for (const Json& r : j.at("rows")) {
    TrialRow row;
    row.cell_id = r.at("cell_id").get<std::string>();
    row.trial = r.at("trial").get<std::uint64_t>();
    row.decision = r.at("decision").get<std::string>();
    row.sample_q = r.at("sample_q").get<std::uint64_t>();
    row.eval_q = r.at("eval_q").get<std::uint64_t>();
    row.graph_q = r.at("graph_q").get<std::uint64_t>();
    row.wall_ms = r.at("wall_ms").get<double>();
    row.witness_len = r.at("witness_len").get<std::uint64_t>();
    if (!r.at("estimate_n").is_null()) row.estimate_n = r.at("estimate_n").get<std::uint64_t>();
    if (r.contains("error")) row.error = r.at("error").get<std::string>();
    report.rows.push_back(std::move(row));
  }
  for (const Json& a : j.at("aggregates")) {
    CellAggregate agg;
    agg.cell_id = a.at("cell_id").get<std::string>();
    agg.trials = a.at("trials").get<std::uint64_t>();
    agg.errors = a.at("errors").get<std::uint64_t>();
    agg.rejections = a.at("rejections").get<std::uint64_t>();
    agg.rejection_rate = a.at("rejection_rate").get<double>();
    agg.median_total_q = a.at("median_total_q").get<std::uint64_t>();
    agg.p95_total_q = a.at("p95_total_q").get<std::uint64_t>();
    if (!a.at("median_estimate").is_null()) agg.median_estimate = a.at("median_estimate").get<std::uint64_t>();
    report.aggregates.push_back(std::move(agg));
  }
  return report;
}

enum class ReportFormat { csv, json };

inline std::string emit_report(const ExperimentReport& report, ReportFormat format) {
  return format == ReportFormat::csv ? emit_csv(report) : emit_json(report);
}

// ---------------------------------------------------------------------------
// Execution.

inline BoundedDegreeGraph load_cell_graph(const GraphSource& src) {
  if (src.file) return load_graph(read_file(*src.file));
  return generate_instance(src.family);
}

inline VertexDistribution load_cell_distribution(const DistSource& src, std::size_t n) {
  if (src.file) return load_distribution(read_file(*src.file), n);
  if (src.kind == "zipf") return make_zipf(n, src.zipf_s);
  if (src.kind == "point") return make_point_mass(n, src.point);
  if (src.kind == "random") return make_random(n, src.seed);
  return make_uniform(n);
}

/// One trial of a cell with seed seed_base + trial.
inline TrialRow run_trial(const CellSpec& cell, const BoundedDegreeGraph& graph,
                          const VertexDistribution& dist, std::uint64_t trial, bool timing) {
  TrialRow row;
  row.cell_id = cell.id;
  row.trial = trial;
  const std::uint64_t seed = cell.seed_base + trial;
  const auto started = std::chrono::steady_clock::now();
  try {
    const auto fill = [&](const Verdict& v) {
      row.decision = to_string(v.decision);
      row.sample_q = v.queries.sample;
      row.eval_q = v.queries.eval;
      row.graph_q = v.queries.graph;
      row.witness_len = v.witness.size();
      row.estimate_n = v.estimate;
    };
    switch (cell.tester) {
      case TesterId::bipartite:
        fill(test_bipartite(graph, dist, cell.eps, seed, cell.options.inner));
        break;
      case TesterId::bipartite_bound:
        fill(test_bipartite_with_bound(graph, dist, cell.eps, *cell.support_bound, seed, cell.options.inner));
        break;
      case TesterId::cycle_free: {
        CycleTesterOptions opts = cell.options;
        opts.support_bound = cell.support_bound;
        fill(test_cycle_free(graph, dist, cell.eps, seed, opts));
        break;
      }
      case TesterId::estimate_support: {
        EstimatorParams p;
        p.eta = cell.eta;
        p.beta = cell.beta;
        OracleSession session(dist, derive_seed(seed, 0x5a));
        row.decision = "estimate";
        if (cell.rough) {
          const auto est = rough_estimate(session, p);
          row.estimate_n = est.estimate;
        } else {
          const auto est = refined_estimate(session, p);
          row.estimate_n = est.estimate;
        }
        const auto q = session.counters();
        row.sample_q = q.sample;
        row.eval_q = q.eval;
        row.graph_q = q.graph;
        break;
      }
    }
  } catch (const std::exception& e) {
    row = TrialRow{};
    row.cell_id = cell.id;
    row.trial = trial;
    row.decision = "error";
    row.error = e.what();
  }
  if (timing) row.wall_ms = detail::elapsed_ms(started);
  return row;
}

/// Runs every cell x trial on a pool of `jobs` workers. Rows are merged in
/// cell/trial order, so the report does not depend on scheduling. A cell
/// whose graph or distribution cannot be loaded yields one error row.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  struct Loaded {
    std::optional<BoundedDegreeGraph> graph;
    std::optional<VertexDistribution> dist;
    std::string error;
  };
  std::vector<Loaded> loaded(config.cells.size());
  struct Task {
    std::size_t cell;
    std::uint64_t trial;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < config.cells.size(); ++c) {
    try {
      loaded[c].graph = load_cell_graph(config.cells[c].graph);
      loaded[c].dist = load_cell_distribution(config.cells[c].dist, loaded[c].graph->vertex_count());
    } catch (const std::exception& e) {
      loaded[c].error = e.what();
    }
    if (loaded[c].error.empty()) {
      for (std::uint64_t t = 0; t < config.cells[c].trials; ++t) tasks.push_back({c, t});
    } else {
      tasks.push_back({c, 0});
    }
  }

  std::vector<TrialRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& task = tasks[i];
      const auto& cell = config.cells[task.cell];
      const auto& l = loaded[task.cell];
      if (!l.error.empty()) {
        rows[i].cell_id = cell.id;
        rows[i].trial = 0;
        rows[i].decision = "error";
        rows[i].error = l.error;
        continue;
      }
      rows[i] = run_trial(cell, *l.graph, *l.dist, task.trial, config.timing);
    }
  };
  const unsigned jobs = std::max(1U, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  ExperimentReport report;
  report.rows = std::move(rows);
  report.aggregates = compute_aggregates(report.rows);
  if (!aggregates_consistent(report)) throw Error("internal: aggregate self-check failed");
  return report;
}

}  // namespace vdf
