#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rscore/errors.hpp"
#include "rscore/experiment.hpp"
#include "rscore/io.hpp"
#include "rscore/pipeline.hpp"
#include "rscore/plot.hpp"

namespace rscore::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  std::string method = "rscore";
  std::optional<int> iters;
  int k = 0;
  std::string input;
  std::vector<std::string> inputs;
  std::string truth;
  std::string kind = "error-vs-iteration";
  bool timings = false;
  int points = 481;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = load_experiment_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.iters) cfg.algorithm.iterations = *o.iters;
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

void cmd_gen(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const Replicate sim = simulate_replication(cfg, std::nullopt, 0);
  const fs::path dir = cfg.output_dir;
  io::write_edge_list(dir / "adjacency.txt", sim.adjacency);
  io::write_partition(dir / "truth.txt", sim.params.pi);
  io::write_csv(dir / "theta.csv", Eigen::MatrixXd(sim.params.theta));
  io::write_csv(dir / "P.csv", sim.params.P);
  auto report = io::open_output(dir / "conditions.txt");
  report << format_report(check_conditions(sim.params));
  spdlog::info("wrote n={} edges={} to {}", sim.adjacency.size(), sim.adjacency.edge_count(), dir.string());
}

void cmd_fit(const Options& o) {
  if (o.k < 2) throw ConfigError("--k must be at least 2");
  if (o.method != "score" && o.method != "rscore") throw ConfigError(fmt::format("unknown method '{}'", o.method));
  const AdjacencyMatrix a = io::read_edge_list(fs::path(o.input));
  std::optional<Partition> truth;
  if (!o.truth.empty()) truth = io::read_partition(fs::path(o.truth));

  RScoreConfig rc;
  rc.k = o.k;
  rc.seed = o.seed.value_or(0);
  rc.iterations = o.method == "score" ? 0 : o.iters.value_or(10);
  const RScoreResult res = r_score(a, rc, truth ? &*truth : nullptr);

  const fs::path dir = o.out.empty() ? fs::path("fit-out") : fs::path(o.out);
  io::write_partition(dir / "partition.txt", res.partition);
  write_trace_csv(dir / "trace.csv", res.trace);
  for (auto it = res.trace.records.rbegin(); it != res.trace.records.rend(); ++it) {
    if (it->fit) {
      save_fit(dir / "fit", *it->fit);
      break;
    }
  }
  if (!res.trace.stop_reason.empty()) spdlog::info("{}", res.trace.stop_reason);
  if (truth) std::cout << fmt::format("hamming_error {}\n", io::format_double(res.trace.records.back().hamming.value()));
}

void cmd_exp(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const auto rows = run_experiment(cfg, RunOptions{o.threads});
  const fs::path dir = cfg.output_dir;
  write_results_csv(dir / "results.csv", rows);
  if (o.timings) write_results_csv(dir / "timings.csv", rows, true);

  auto summary = io::open_output(dir / "summary.csv");
  summary << "method,param,iteration,mean,se,count\n";
  std::vector<std::optional<double>> params;
  if (cfg.sweep_values.empty()) {
    params.emplace_back();
  } else {
    params.assign(cfg.sweep_values.begin(), cfg.sweep_values.end());
  }
  for (const auto& p : params) {
    std::vector<ResultRow> sel;
    for (const auto& r : rows) {
      if (r.param == p) sel.push_back(r);
    }
    for (const char* m : {"score", "rscore", "oracle-N"}) {
      for (const auto& s : summarize(sel, m, false)) {
        summary << m << ',' << (p ? io::format_double(*p) : "") << ',' << s.x << ',' << io::format_double(s.mean)
                << ',' << io::format_double(s.se) << ',' << s.count << '\n';
      }
    }
  }
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.status != "ok";
  if (failed > 0) spdlog::warn("{} replication(s) failed; see the status column", failed);
  plot_results(rows, cfg.sweep_values.empty() ? PlotKind::error_vs_iteration : PlotKind::error_vs_beta2,
               dir / "errors.svg");
  spdlog::info("wrote {} rows to {}", rows.size(), (dir / "results.csv").string());
}

void cmd_plot(const Options& o) {
  const PlotKind kind = parse_plot_kind(o.kind);
  std::vector<ResultRow> rows;
  for (const auto& in : o.inputs) {
    auto part = read_results_csv(fs::path(in));
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (kind != PlotKind::rate_curves && rows.empty()) throw ConfigError("plot needs at least one --input CSV");
  plot_results(rows, kind, o.out.empty() ? fs::path("plot.svg") : fs::path(o.out));
}

void cmd_rates(const Options& o) {
  const auto grid = rate_curve_grid(o.points);
  const fs::path dir = o.out.empty() ? fs::path("rates") : fs::path(o.out);
  auto csv = io::open_output(dir / "rates.csv");
  write_rates_csv(csv, grid);
  auto svg = io::open_output(dir / "rates.svg");
  write_svg(svg, rates_frame(grid));
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"R-SCORE community detection for logit-DCBM networks"};
  app.require_subcommand(1);
  Options o;
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  auto* gen = app.add_subcommand("gen", "simulate replication 0 of a config and write it to disk");
  gen->add_option("--config", o.config, "experiment INI file")->required();
  gen->add_option("--seed", o.seed, "override the master seed");
  gen->add_option("--out", o.out, "output directory");

  auto* fit = app.add_subcommand("fit", "run SCORE / R-SCORE on an edge list");
  fit->add_option("--input", o.input, "edge-list file")->required();
  fit->add_option("--k", o.k, "number of communities")->required();
  fit->add_option("--method", o.method, "score or rscore");
  fit->add_option("--iters", o.iters, "R-SCORE iterations (default 10)");
  fit->add_option("--seed", o.seed, "k-means seed");
  fit->add_option("--truth", o.truth, "true partition, 1-based labels");
  fit->add_option("--out", o.out, "output directory");

  auto* exp = app.add_subcommand("exp", "run an experiment config");
  exp->add_option("--config", o.config, "experiment INI file")->required();
  exp->add_option("--seed", o.seed, "override the master seed");
  exp->add_option("--iters", o.iters, "override algorithm.iterations");
  exp->add_option("--out", o.out, "override experiment.output");
  exp->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  exp->add_flag("--timings", o.timings, "also write timings.csv with wall-clock seconds");

  auto* plot = app.add_subcommand("plot", "render results CSVs as SVG");
  plot->add_option("--input", o.inputs, "results CSV (repeatable)");
  plot->add_option("--kind", o.kind, "error-vs-iteration, error-vs-beta2 or rate-curves");
  plot->add_option("--out", o.out, "SVG file");

  auto* rates = app.add_subcommand("rates", "error-rate exponents a0, a1 as CSV and SVG");
  rates->add_option("--out", o.out, "output directory");
  rates->add_option("--points", o.points, "grid size")->check(CLI::Range(2, 100000));

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const auto level = spdlog::level::from_str(log_level);
  spdlog::set_level(level);

  try {
    if (*gen) cmd_gen(o);
    if (*fit) cmd_fit(o);
    if (*exp) cmd_exp(o);
    if (*plot) cmd_plot(o);
    if (*rates) cmd_rates(o);
  } catch (const ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace rscore::cli
