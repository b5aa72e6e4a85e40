#include "rscore/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rscore/errors.hpp"
#include "rscore/io.hpp"

namespace rscore {
namespace {

using Clock = std::chrono::steady_clock;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(std::string(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, text));
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const auto v = to_u64(key, text);
  if (v > 1'000'000'000ULL) throw ConfigError(fmt::format("{}: {} is out of range", key, v));
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, text));
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(to_double(key, part));
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"id", "replications", "seed", "output", "methods"}},
      {"model",
       {"n", "k", "sizes", "theta", "theta_lo", "theta_hi", "pareto_scale", "pareto_shape", "pareto_truncation",
        "b_n", "mixing", "beta", "beta1", "beta2", "shuffle"}},
      {"algorithm", {"iterations", "clip", "restarts", "max_iter", "early_stop", "warm_start", "cycle_order"}},
      {"sweep", {"parameter", "values", "start", "stop", "step"}},
  };
  return keys;
}

std::string csv_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// One (sweep value, replication) cell of the experiment.
std::vector<ResultRow> run_replication(const ExperimentConfig& cfg, std::optional<double> param, int rep) {
  const std::uint64_t rep_seed = Rng(cfg.seed).split(static_cast<std::uint64_t>(rep)).key();
  std::vector<ResultRow> rows;
  const auto row = [&](std::string method, int iteration, double err, double secs) {
    ResultRow r;
    r.experiment = cfg.id;
    r.param = param;
    r.replication = rep;
    r.seed = rep_seed;
    r.method = std::move(method);
    r.iteration = iteration;
    r.hamming_error = err;
    r.seconds = secs;
    rows.push_back(std::move(r));
  };
  const auto since = [](Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  try {
    const ExperimentConfig c = param ? cfg.at(*param) : cfg;
    const Replicate sim = simulate_replication(cfg, param, rep);
    const ModelParams& params = sim.params;
    const AdjacencyMatrix& a = sim.adjacency;
    const std::uint64_t algo_seed = sim.algorithm_seed;

    if (c.run_score) {
      const auto t0 = Clock::now();
      Rng rng = round_rng(algo_seed, nullptr);
      const ScoreResult s = score_adjacency(a, c.k, rng, c.algorithm.score);
      row("score", 0, hamming_error(s.partition, params.pi), since(t0));
    }
    if (c.run_rscore) {
      RScoreConfig rc = c.algorithm;
      rc.k = c.k;
      rc.seed = algo_seed;
      const auto t0 = Clock::now();
      const RScoreResult res = r_score(a, rc, &params.pi);
      const double secs = since(t0);
      double last = 0.0;
      for (int m = 0; m <= rc.iterations; ++m) {
        if (static_cast<std::size_t>(m) < res.trace.records.size()) last = *res.trace.records[static_cast<std::size_t>(m)].hamming;
        row("rscore", m, last, m == rc.iterations ? secs : 0.0);
      }
      if (!res.trace.stop_reason.empty()) spdlog::debug("{} rep {}: {}", c.id, rep, res.trace.stop_reason);
    }
    if (c.run_oracle) {
      const auto t0 = Clock::now();
      const DenseSymMatrix& nf = sim.mean.nfactor;
      WeightedAdjacency renorm(a, [&](std::size_t i, std::size_t j) { return 1.0 / nf(i, j); });
      Rng rng = Rng(algo_seed).split("oracle");
      const ScoreResult s = score_detailed(renorm, c.k, rng, c.algorithm.score);
      row("oracle-N", 1, hamming_error(s.partition, params.pi), since(t0));
    }
  } catch (const std::exception& e) {
    spdlog::warn("{}: replication {} failed: {}", cfg.id, rep, e.what());
    rows.clear();
    row("replication", 0, std::nan(""), 0.0);
    rows.back().status = csv_field(fmt::format("error: {}", e.what()));
  }
  return rows;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (id.empty()) throw ConfigError("experiment id must not be empty");
  if (k < 2) throw ConfigError(fmt::format("K must be at least 2, got {}", k));
  if (n < 3 * static_cast<std::size_t>(k)) throw ConfigError(fmt::format("n={} is too small for K={}", n, k));
  if (!sizes.empty()) {
    if (sizes.size() != static_cast<std::size_t>(k)) {
      throw ConfigError(fmt::format("{} community sizes given for K={}", sizes.size(), k));
    }
    std::size_t total = 0;
    for (const auto s : sizes) total += s;
    if (total != n) throw ConfigError(fmt::format("community sizes sum to {}, expected n={}", total, n));
  }
  theta.validate();
  if (mixing == MixingKind::two_block && k % 2 != 0) throw ConfigError("two-block mixing needs an even K");
  if (replications < 1) throw ConfigError("replications must be at least 1");
  if (algorithm.iterations < 0) throw ConfigError("iterations must be non-negative");
  if (algorithm.score.kmeans.restarts < 1) throw ConfigError("restarts must be at least 1");
  if (!run_score && !run_rscore && !run_oracle) throw ConfigError("no method selected");
  if (!sweep_parameter.empty() && sweep_values.empty()) throw ConfigError("sweep has no values");
  for (const double v : sweep_values) at(v).mixing_matrix();
  if (sweep_values.empty()) mixing_matrix();
}

ExperimentConfig ExperimentConfig::at(double param) const {
  ExperimentConfig c = *this;
  if (sweep_parameter == "beta") {
    c.beta = param;
  } else if (sweep_parameter == "beta1") {
    c.beta1 = param;
  } else if (sweep_parameter == "beta2") {
    c.beta2 = param;
  } else if (sweep_parameter == "b_n") {
    c.theta.b_n = param;
  } else {
    throw ConfigError(fmt::format("unknown sweep parameter '{}'", sweep_parameter));
  }
  return c;
}

std::vector<std::size_t> ExperimentConfig::community_sizes() const {
  if (!sizes.empty()) return sizes;
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::size_t> out(kk, n / kk);
  for (std::size_t i = 0; i < n % kk; ++i) ++out[i];
  return out;
}

Eigen::MatrixXd ExperimentConfig::mixing_matrix() const {
  Eigen::MatrixXd p = mixing == MixingKind::two_block ? two_block_mixing(k, beta1, beta2) : uniform_offdiag_mixing(k, beta);
  if ((p.array() < 0.0).any()) throw ConfigError("mixing parameters give a negative entry in P");
  return p;
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }

  std::map<std::string, std::string> kv;
  for (const auto& [section, body] : tree) {
    const auto known = known_keys().find(section);
    if (known == known_keys().end()) {
      if (body.empty()) throw ConfigError(fmt::format("key '{}' outside of any section", section));
      throw ConfigError(fmt::format("unknown section [{}]", section));
    }
    for (const auto& [key, value] : body) {
      if (!known->second.contains(key)) throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, section));
      kv[section + "." + key] = trim(value.data());
    }
  }
  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  const auto need = [&](const std::string& key) -> const std::string& {
    const auto* v = get(key);
    if (v == nullptr) throw ConfigError(fmt::format("missing required key '{}'", key));
    return *v;
  };

  ExperimentConfig c;
  if (const auto* v = get("experiment.id")) c.id = *v;
  if (const auto* v = get("experiment.replications")) c.replications = to_int("replications", *v);
  if (const auto* v = get("experiment.seed")) c.seed = to_u64("seed", *v);
  if (const auto* v = get("experiment.output")) c.output_dir = *v;
  if (const auto* v = get("experiment.methods")) {
    c.run_score = c.run_rscore = c.run_oracle = false;
    for (const auto& m : split(*v, ',')) {
      const auto t = trim(m);
      if (t == "score") {
        c.run_score = true;
      } else if (t == "rscore") {
        c.run_rscore = true;
      } else if (t == "oracle") {
        c.run_oracle = true;
      } else {
        throw ConfigError(fmt::format("unknown method '{}' (score, rscore, oracle)", t));
      }
    }
  }

  c.n = to_u64("n", need("model.n"));
  c.k = to_int("k", need("model.k"));
  if (const auto* v = get("model.sizes")) {
    for (const auto& s : split(*v, ',')) c.sizes.push_back(to_u64("sizes", s));
  }
  if (const auto* v = get("model.shuffle")) c.shuffle_nodes = to_bool("shuffle", *v);
  const double b_n = to_double("b_n", need("model.b_n"));
  const std::string kind = get("model.theta") ? *get("model.theta") : "uniform";
  if (kind == "uniform") {
    c.theta = ThetaSpec::uniform(to_double("theta_lo", need("model.theta_lo")),
                                 to_double("theta_hi", need("model.theta_hi")), b_n);
  } else if (kind == "pareto") {
    c.theta = ThetaSpec::pareto(to_double("pareto_scale", need("model.pareto_scale")),
                                to_double("pareto_shape", need("model.pareto_shape")),
                                to_double("pareto_truncation", need("model.pareto_truncation")), b_n);
  } else {
    throw ConfigError(fmt::format("theta must be uniform or pareto, got '{}'", kind));
  }
  const std::string mixing = get("model.mixing") ? *get("model.mixing") : "uniform-offdiag";
  if (mixing == "uniform-offdiag") {
    c.mixing = MixingKind::uniform_offdiag;
    if (const auto* v = get("model.beta")) c.beta = to_double("beta", *v);
  } else if (mixing == "two-block") {
    c.mixing = MixingKind::two_block;
    if (const auto* v = get("model.beta1")) c.beta1 = to_double("beta1", *v);
    if (const auto* v = get("model.beta2")) c.beta2 = to_double("beta2", *v);
  } else {
    throw ConfigError(fmt::format("mixing must be uniform-offdiag or two-block, got '{}'", mixing));
  }

  auto& alg = c.algorithm;
  if (const auto* v = get("algorithm.iterations")) alg.iterations = to_int("iterations", *v);
  if (const auto* v = get("algorithm.clip")) {
    if (*v == "auto") {
      alg.score.clip = kAutoClip;
    } else if (*v == "none") {
      alg.score.clip = kNoClip;
    } else {
      alg.score.clip = to_double("clip", *v);
      if (!(alg.score.clip > 0.0)) throw ConfigError("clip must be positive, 'auto' or 'none'");
    }
  }
  if (const auto* v = get("algorithm.restarts")) alg.score.kmeans.restarts = to_int("restarts", *v);
  if (const auto* v = get("algorithm.max_iter")) alg.score.kmeans.max_iter = to_int("max_iter", *v);
  if (const auto* v = get("algorithm.early_stop")) alg.early_stop = to_bool("early_stop", *v);
  if (const auto* v = get("algorithm.warm_start")) alg.warm_start = to_bool("warm_start", *v);
  if (const auto* v = get("algorithm.cycle_order")) alg.cycle_order = to_int("cycle_order", *v);

  if (const auto* v = get("sweep.parameter")) {
    c.sweep_parameter = *v;
    if (const auto* vals = get("sweep.values")) {
      c.sweep_values = to_doubles("values", *vals);
    } else {
      const double start = to_double("start", need("sweep.start"));
      const double stop = to_double("stop", need("sweep.stop"));
      const double step = to_double("step", need("sweep.step"));
      if (!(step > 0.0) || stop < start) throw ConfigError("sweep needs step > 0 and stop >= start");
      // Grid points are start + i * step; rounding keeps the end point.
      const auto count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
      for (int i = 0; i < count; ++i) c.sweep_values.push_back(start + i * step);
    }
  } else if (get("sweep.values") || get("sweep.start")) {
    throw ConfigError("sweep values given without sweep.parameter");
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  return parse_experiment_config(in);
}

ModelParams generate_model(const ExperimentConfig& cfg, Rng& rng) {
  ModelParams p;
  const auto sizes = cfg.community_sizes();
  Rng theta_rng = rng.split("theta");
  Rng shuffle_rng = rng.split("shuffle");
  p.pi = gen_partition(cfg.n, sizes, cfg.shuffle_nodes ? &shuffle_rng : nullptr);
  p.theta = gen_theta(cfg.theta, cfg.n, theta_rng);
  p.P = cfg.mixing_matrix();
  p.validate();
  return p;
}

Replicate simulate_replication(const ExperimentConfig& cfg, std::optional<double> param, int replication) {
  const ExperimentConfig c = param ? cfg.at(*param) : cfg;
  const Rng rep_rng = Rng(cfg.seed).split(static_cast<std::uint64_t>(replication));
  Rng model_rng = rep_rng.split("model");
  Rng sample_rng = rep_rng.split("sample");
  ModelParams params = generate_model(c, model_rng);
  LogitMean mean = logit_link(build_tilde_omega(params));
  AdjacencyMatrix a = sample_adjacency(mean.omega, sample_rng);
  return Replicate{std::move(params), std::move(mean), std::move(a), rep_rng.key(), rep_rng.split("algorithm")()};
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  std::vector<std::optional<double>> params;
  if (cfg.sweep_values.empty()) {
    params.emplace_back();
  } else {
    params.assign(cfg.sweep_values.begin(), cfg.sweep_values.end());
  }
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);
  const std::size_t jobs = params.size() * reps;
  std::vector<std::vector<ResultRow>> slots(jobs);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      slots[j] = run_replication(cfg, params[j / reps], static_cast<int>(j % reps));
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opts.threads, 1)), 1, jobs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<ResultRow> rows;
  for (auto& s : slots) std::move(s.begin(), s.end(), std::back_inserter(rows));
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool timings) {
  out << "experiment,param,replication,seed,method,iteration,hamming_error,status";
  if (timings) out << ",seconds";
  out << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.experiment) << ',' << (r.param ? io::format_double(*r.param) : "") << ',' << r.replication
        << ',' << r.seed << ',' << csv_field(r.method) << ',' << r.iteration << ','
        << (std::isnan(r.hamming_error) ? "" : io::format_double(r.hamming_error)) << ',' << csv_field(r.status);
    if (timings) out << ',' << io::format_double(r.seconds);
    out << '\n';
  }
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows, bool timings) {
  auto out = io::open_output(path);
  write_results_csv(out, rows, timings);
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("results CSV is empty");
  const auto header = split(trim(line), ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"experiment", "replication", "method", "iteration", "hamming_error"}) {
    if (!col.contains(required)) throw IoError(fmt::format("results CSV lacks column '{}'", required));
  }
  const auto field = [&](const std::vector<std::string>& f, const char* name) -> std::string {
    const auto it = col.find(name);
    return it == col.end() || it->second >= f.size() ? std::string() : f[it->second];
  };

  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) {
      throw IoError(fmt::format("results CSV line {}: {} fields, expected {}", lineno, f.size(), header.size()));
    }
    try {
      ResultRow r;
      r.experiment = field(f, "experiment");
      if (const auto p = field(f, "param"); !p.empty()) r.param = to_double("param", p);
      r.replication = to_int("replication", field(f, "replication"));
      if (const auto s = field(f, "seed"); !s.empty()) r.seed = to_u64("seed", s);
      r.method = field(f, "method");
      r.iteration = to_int("iteration", field(f, "iteration"));
      const auto e = field(f, "hamming_error");
      r.hamming_error = e.empty() ? std::nan("") : to_double("hamming_error", e);
      if (const auto s = field(f, "status"); !s.empty()) r.status = s;
      if (const auto s = field(f, "seconds"); !s.empty()) r.seconds = to_double("seconds", s);
      rows.push_back(std::move(r));
    } catch (const ConfigError& e) {
      throw IoError(fmt::format("results CSV line {}: {}", lineno, e.what()));
    }
  }
  return rows;
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  return read_results_csv(in);
}

std::vector<SeriesPoint> summarize(const std::vector<ResultRow>& rows, const std::string& method, bool by_param,
                                   int iteration) {
  // Last iteration per (param, replication) when asked for.
  std::map<std::pair<double, int>, int> last;
  if (by_param && iteration < 0) {
    for (const auto& r : rows) {
      if (r.method != method || r.status != "ok") continue;
      auto& l = last[{r.param.value_or(0.0), r.replication}];
      l = std::max(l, r.iteration);
    }
  }
  std::map<double, std::vector<double>> groups;
  for (const auto& r : rows) {
    if (r.method != method || r.status != "ok" || std::isnan(r.hamming_error)) continue;
    if (by_param) {
      const double p = r.param.value_or(0.0);
      const int want = iteration < 0 ? last[{p, r.replication}] : iteration;
      if (r.iteration != want) continue;
      groups[p].push_back(r.hamming_error);
    } else {
      groups[static_cast<double>(r.iteration)].push_back(r.hamming_error);
    }
  }
  std::vector<SeriesPoint> out;
  for (const auto& [x, v] : groups) {
    SeriesPoint s;
    s.x = x;
    s.count = v.size();
    double sum = 0.0;
    for (const double e : v) sum += e;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (const double e : v) ss += (e - s.mean) * (e - s.mean);
      s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace rscore
