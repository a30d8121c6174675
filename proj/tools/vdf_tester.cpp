#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "vdf/vdf.hpp"

namespace {

using vdf::Json;

struct TestArgs {
  std::string graph;
  std::string dist;
  double eps = 0.3;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1;
  std::uint64_t support_bound = 0;
  bool no_saturate = false;
  std::vector<double> schedule;  // a b c e f
};

void add_test_options(CLI::App* cmd, TestArgs& a) {
  cmd->add_option("--graph", a.graph, "graph file")->required();
  cmd->add_option("--dist", a.dist, "distribution file")->required();
  cmd->add_option("--eps", a.eps, "proximity parameter in (0, 1)")->required();
  cmd->add_option("--seed", a.seed, "base seed; trial t uses seed + t")->required();
  cmd->add_option("--trials", a.trials, "number of trials")->default_val(1);
  cmd->add_option("--support-bound", a.support_bound, "skip estimation and use this bound");
  cmd->add_flag("--no-saturate", a.no_saturate, "always run the full walk schedule");
  cmd->add_option("--schedule", a.schedule, "walk schedule constants a b c e f")->expected(5);
}

vdf::TesterOptions tester_options(const TestArgs& a) {
  vdf::TesterOptions o;
  o.stop_when_saturated = !a.no_saturate;
  if (a.schedule.size() == 5) {
    o.schedule = {a.schedule[0], a.schedule[1], a.schedule[2], a.schedule[3], a.schedule[4]};
  }
  return o;
}

// One JSON verdict per trial on stdout, then the CSV summary.
template <class RunTrial>
void run_trials(const TestArgs& a, RunTrial&& run) {
  std::string csv = "trial,decision,sample_q,eval_q,graph_q,witness_len\n";
  for (std::uint64_t t = 0; t < a.trials; ++t) {
    const vdf::Verdict v = run(a.seed + t);
    Json j{{"trial", t}, {"seed", a.seed + t}};
    j.update(vdf::to_json(v));
    std::cout << j.dump() << "\n";
    csv += std::to_string(t) + "," + vdf::to_string(v.decision) + "," + std::to_string(v.queries.sample) +
           "," + std::to_string(v.queries.eval) + "," + std::to_string(v.queries.graph) + "," +
           std::to_string(v.witness.size()) + "\n";
  }
  std::cout << "\n" << csv;
}

Json distance_json(const char* property, const vdf::DistanceReport& r) {
  Json removed = Json::array();
  for (const auto& e : r.removed) removed.push_back(Json::array({e.u, e.v}));
  return Json{{"property", property},
              {"distance", r.distance},
              {"method", vdf::to_string(r.method)},
              {"removed", removed}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution-free testers for bipartiteness and cycle-freeness"};
  app.require_subcommand(1);

  TestArgs bip;
  auto* cmd_bip = app.add_subcommand("test-bipartite", "test bipartiteness");
  add_test_options(cmd_bip, bip);

  TestArgs cyc;
  double kappa = 1.0 / 8.0;
  unsigned reps = 4;
  auto* cmd_cyc = app.add_subcommand("test-cycle-free", "test cycle-freeness");
  add_test_options(cmd_cyc, cyc);
  cmd_cyc->add_option("--kappa", kappa, "inner proximity constant")->default_val(kappa);
  cmd_cyc->add_option("--reps", reps, "random labelings per trial")->default_val(reps);

  std::string est_dist;
  double eta = 0.1;
  double beta = 1.5;
  std::uint64_t est_seed = 0;
  std::string est_mode = "refined";
  auto* cmd_est = app.add_subcommand("estimate-support", "estimate the effective support size");
  cmd_est->add_option("--dist", est_dist, "distribution file")->required();
  cmd_est->add_option("--eta", eta, "effectiveness parameter")->required();
  cmd_est->add_option("--beta", beta, "bucket ratio")->default_val(beta);
  cmd_est->add_option("--seed", est_seed, "seed")->required();
  cmd_est->add_option("--mode", est_mode, "rough or refined")
      ->check(CLI::IsMember({"rough", "refined"}))
      ->default_val(est_mode);

  std::string or_graph;
  std::string or_dist;
  std::string or_property;
  std::string or_labels;
  auto* cmd_or = app.add_subcommand("oracle", "exact distance to a property");
  cmd_or->add_option("--graph", or_graph, "graph file")->required();
  cmd_or->add_option("--dist", or_dist, "distribution file")->required();
  cmd_or->add_option("--property", or_property, "bipartite, 2col or cyclefree")
      ->required()
      ->check(CLI::IsMember({"bipartite", "2col", "cyclefree"}));
  cmd_or->add_option("--labels", or_labels, "edge labels \"u v eq|neq\" for 2col");

  std::string config_path;
  std::string out_dir;
  unsigned jobs = 0;
  bool timing = false;
  auto* cmd_run = app.add_subcommand("run", "run an experiment config");
  cmd_run->add_option("--config", config_path, "JSON config")->required();
  cmd_run->add_option("--out", out_dir, "output directory")->required();
  cmd_run->add_option("--jobs", jobs, "worker threads (overrides the config)");
  cmd_run->add_flag("--timing", timing, "record wall-clock times (reports are then not reproducible)");

  std::string family;
  std::size_t size = 0;
  unsigned degree = 2;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* cmd_gen = app.add_subcommand("generate", "generate a graph instance");
  cmd_gen->add_option("--family", family, "odd_cycle, even_cycle, random_bipartite, random_d_regular, forest, cycles_plus_forest")
      ->required();
  cmd_gen->add_option("--size", size, "number of vertices")->required();
  cmd_gen->add_option("--degree", degree, "degree bound")->default_val(degree);
  cmd_gen->add_option("--seed", gen_seed, "seed")->default_val(0);
  cmd_gen->add_option("--out", gen_out, "output file (stdout if omitted)");

  std::size_t dist_n = 0;
  std::string dist_kind = "uniform";
  double zipf_s = 1.0;
  vdf::Vertex point = 1;
  std::uint64_t dist_seed = 0;
  std::string dist_out;
  auto* cmd_gd = app.add_subcommand("generate-dist", "generate a vertex distribution");
  cmd_gd->add_option("--n", dist_n, "number of vertices")->required();
  cmd_gd->add_option("--kind", dist_kind, "uniform, zipf, point or random")
      ->check(CLI::IsMember({"uniform", "zipf", "point", "random"}))
      ->default_val(dist_kind);
  cmd_gd->add_option("--s", zipf_s, "zipf exponent")->default_val(zipf_s);
  cmd_gd->add_option("--vertex", point, "point-mass vertex")->default_val(point);
  cmd_gd->add_option("--seed", dist_seed, "seed for random")->default_val(0);
  cmd_gd->add_option("--out", dist_out, "output file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_bip->parsed()) {
      const auto g = vdf::load_graph(vdf::read_file(bip.graph));
      const auto d = vdf::load_distribution(vdf::read_file(bip.dist), g.vertex_count());
      const auto opts = tester_options(bip);
      run_trials(bip, [&](std::uint64_t seed) {
        return bip.support_bound ? vdf::test_bipartite_with_bound(g, d, bip.eps, bip.support_bound, seed, opts)
                                 : vdf::test_bipartite(g, d, bip.eps, seed, opts);
      });
    } else if (cmd_cyc->parsed()) {
      const auto g = vdf::load_graph(vdf::read_file(cyc.graph));
      const auto d = vdf::load_distribution(vdf::read_file(cyc.dist), g.vertex_count());
      vdf::CycleTesterOptions opts;
      opts.inner = tester_options(cyc);
      opts.kappa = kappa;
      opts.reps = reps;
      if (cyc.support_bound) opts.support_bound = cyc.support_bound;
      run_trials(cyc, [&](std::uint64_t seed) { return vdf::test_cycle_free(g, d, cyc.eps, seed, opts); });
    } else if (cmd_est->parsed()) {
      const auto d = vdf::load_distribution(vdf::read_file(est_dist));
      vdf::EstimatorParams p;
      p.eta = eta;
      p.beta = beta;
      Json j{{"mode", est_mode}, {"eta", eta}, {"beta", beta}, {"seed", est_seed}};
      if (est_mode == "rough") {
        const auto r = vdf::rough_estimate(d, p, est_seed);
        j["estimate"] = r.estimate;
        j["iterations"] = r.iterations;
        j["queries"] = vdf::to_json(r.queries);
      } else {
        const auto r = vdf::refined_estimate(d, p, est_seed);
        j["estimate"] = r.estimate;
        j["rough"] = r.rough;
        j["buckets"] = r.buckets;
        j["kept_buckets"] = r.kept_buckets;
        j["light_mass"] = r.light_mass;
        j["disposed"] = r.disposed;
        j["queries"] = vdf::to_json(r.queries);
      }
      std::cout << j.dump() << "\n";
    } else if (cmd_or->parsed()) {
      const auto g = vdf::load_graph(vdf::read_file(or_graph));
      const auto d = vdf::load_distribution(vdf::read_file(or_dist), g.vertex_count());
      Json j;
      if (or_property == "bipartite") {
        j = distance_json("bipartite", vdf::bipartite_distance(g, d));
      } else if (or_property == "cyclefree") {
        j = distance_json("cyclefree", vdf::cyclefree_distance(g, d));
      } else {
        const auto labels = or_labels.empty() ? vdf::all_neq_labels(g)
                                              : vdf::load_labels(g, vdf::read_file(or_labels));
        j = distance_json("2col", vdf::gen2col_distance(g, labels, d));
      }
      std::cout << j.dump(2) << "\n";
    } else if (cmd_run->parsed()) {
      vdf::ExperimentConfig cfg;
      try {
        const std::filesystem::path path(config_path);
        cfg = vdf::parse_config(vdf::read_file(path), path.parent_path());
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      if (jobs > 0) cfg.jobs = jobs;
      if (timing) cfg.timing = true;
      for (const auto& cell : cfg.cells) {
        for (const auto* f : {&cell.graph.file, &cell.dist.file}) {
          if (*f && !std::filesystem::exists(**f)) {
            std::cerr << "warning: cell '" << cell.id << "' references missing file " << (*f)->string() << "\n";
          }
        }
      }
      const auto report = vdf::run_experiment(cfg);
      std::filesystem::create_directories(out_dir);
      vdf::write_file(std::filesystem::path(out_dir) / "report.csv", vdf::emit_report(report, vdf::ReportFormat::csv));
      vdf::write_file(std::filesystem::path(out_dir) / "report.json", vdf::emit_report(report, vdf::ReportFormat::json));
      for (const auto& r : report.rows) {
        if (r.decision == "error") std::cerr << "error: cell '" << r.cell_id << "' trial " << r.trial << ": " << r.error << "\n";
      }
      return report.all_completed() ? 0 : 1;
    } else if (cmd_gen->parsed()) {
      vdf::InstanceFamily spec{vdf::family_from_string(family), size, degree, gen_seed};
      const auto text = vdf::store_graph(vdf::generate_instance(spec));
      if (gen_out.empty()) std::cout << text;
      else vdf::write_file(gen_out, text);
    } else if (cmd_gd->parsed()) {
      vdf::DistSource src;
      src.kind = dist_kind;
      src.zipf_s = zipf_s;
      src.point = point;
      src.seed = dist_seed;
      const auto text = vdf::store_distribution(vdf::load_cell_distribution(src, dist_n));
      if (dist_out.empty()) std::cout << text;
      else vdf::write_file(dist_out, text);
    }
  } catch (const vdf::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
