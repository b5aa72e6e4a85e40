#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rscore/model.hpp"
#include "rscore/pipeline.hpp"

namespace rscore {

enum class MixingKind { uniform_offdiag, two_block };

/// One simulation study: a model family, the algorithm settings, and an
/// optional one-parameter sweep.
///
/// INI layout (unknown keys are rejected):
///
///   [experiment] id, replications, seed, output, methods (score,rscore,oracle)
///   [model]      n, k, sizes, theta (uniform|pareto), theta_lo, theta_hi,
///                pareto_scale, pareto_shape, pareto_truncation, b_n,
///                mixing (uniform-offdiag|two-block), beta, beta1, beta2, shuffle
///   [algorithm]  iterations, clip (auto|none|<value>), restarts, max_iter,
///                early_stop, warm_start, cycle_order
///   [sweep]      parameter (beta|beta1|beta2|b_n), values (comma list)
///                or start / stop / step
struct ExperimentConfig {
  std::string id = "experiment";
  std::size_t n = 0;
  int k = 2;
  /// Community sizes; empty means n/K each.
  std::vector<std::size_t> sizes;
  bool shuffle_nodes = false;
  ThetaSpec theta;
  MixingKind mixing = MixingKind::uniform_offdiag;
  double beta = 0.5;
  double beta1 = 0.5;
  double beta2 = 0.5;

  RScoreConfig algorithm;
  bool run_score = true;
  bool run_rscore = true;
  /// One SCORE pass on A / N with the true N.
  bool run_oracle = false;

  int replications = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "results";

  /// Name of the swept model parameter; empty when there is no sweep.
  std::string sweep_parameter;
  std::vector<double> sweep_values;

  void validate() const;
  /// Model parameters with the swept parameter set to `param`.
  ExperimentConfig at(double param) const;
  std::vector<std::size_t> community_sizes() const;
  Eigen::MatrixXd mixing_matrix() const;
};

ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Draws theta and the membership for one replication.
ModelParams generate_model(const ExperimentConfig& cfg, Rng& rng);

/// Everything drawn for one replication. Replication r of a config is the
/// same whichever other replications are run.
struct Replicate {
  ModelParams params;
  LogitMean mean;
  AdjacencyMatrix adjacency;
  std::uint64_t seed;
  /// Seed handed to SCORE / R-SCORE.
  std::uint64_t algorithm_seed;
};

Replicate simulate_replication(const ExperimentConfig& cfg, std::optional<double> param, int replication);

/// Error of one method at one iteration of one replication. `status` is "ok"
/// or "error: ..." for a failed replication, whose error field is then NaN.
struct ResultRow {
  std::string experiment;
  std::optional<double> param;
  int replication = 0;
  std::uint64_t seed = 0;
  std::string method;
  int iteration = 0;
  double hamming_error = 0.0;
  double seconds = 0.0;
  std::string status = "ok";
};

struct RunOptions {
  int threads = 1;
};

/// Replications run on a worker pool; rows come back ordered by
/// (param index, replication, method, iteration) whatever the thread count.
/// R-SCORE rows cover iterations 0..M; after an early stop the final
/// partition's error is repeated for the remaining iterations.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Header: experiment,param,replication,seed,method,iteration,hamming_error,status
/// plus a trailing `seconds` column when `timings` is set.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool timings = false);
void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows, bool timings = false);
std::vector<ResultRow> read_results_csv(std::istream& in);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

struct SeriesPoint {
  double x = 0.0;
  double mean = 0.0;
  /// Standard error of the mean; 0 with a single replication.
  double se = 0.0;
  std::size_t count = 0;
};

/// Mean and standard error of hamming_error for `method`, grouped by
/// iteration (by_param = false) or by sweep value at `iteration`
/// (by_param = true; iteration < 0 means each replication's last iteration).
/// Failed rows are skipped.
std::vector<SeriesPoint> summarize(const std::vector<ResultRow>& rows, const std::string& method, bool by_param,
                                   int iteration = -1);

}  // namespace rscore
