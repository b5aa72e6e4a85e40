#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rscore/graph.hpp"
#include "rscore/model.hpp"
#include "rscore/partition.hpp"
#include "rscore/refit.hpp"
#include "rscore/spectral.hpp"

namespace rscore {

struct RScoreConfig {
  /// Refit + SCORE rounds after the initial SCORE; 0 is plain SCORE.
  int iterations = 10;
  int k = 2;
  ScoreOptions score;
  std::uint64_t seed = 0;
  /// Stop once a round reproduces the previous partition.
  bool early_stop = true;
  /// Seed round m's k-means with the centroids of round m-1's partition in
  /// the new embedding (restart 0 only). Off: every round starts fresh.
  bool warm_start = false;
  int cycle_order = 3;
};

struct IterationRecord {
  int iteration = 0;
  Partition partition;
  /// Refit that produced the matrix of this round; empty for round 0.
  std::optional<FitBundle> fit;
  std::optional<double> hamming;
  /// Leading and K-th eigenvalue of the matrix SCORE ran on.
  double lambda1 = 0.0;
  double lambdaK = 0.0;
};

struct RScoreTrace {
  std::vector<IterationRecord> records;
  /// Set when the loop ended before cfg.iterations rounds.
  std::string stop_reason;
};

struct RScoreResult {
  Partition partition;
  RScoreTrace trace;
};

/// Generator used for round `iteration` when the incoming partition is
/// `previous` (absent for round 0). Exposed so callers can reproduce a round.
Rng round_rng(std::uint64_t seed, const Partition* previous);

/// SCORE on A with every stored entry divided by nfactor(i, j). Uses a dense
/// matrix up to opts.eigen.dense_limit nodes and a sparse operator above.
template <class NFactor>
ScoreResult score_renormalized(const AdjacencyMatrix& a, NFactor&& nfactor, int k, Rng& rng,
                               const ScoreOptions& opts, const Eigen::MatrixXd& warm_start = {}) {
  WeightedAdjacency m(a, [&](std::size_t i, std::size_t j) { return 1.0 / nfactor(i, j); });
  return score_detailed(m, k, rng, opts, warm_start);
}

ScoreResult score_adjacency(const AdjacencyMatrix& a, int k, Rng& rng, const ScoreOptions& opts);

/// Recursive SCORE: SCORE on A, then `iterations` rounds of refitting N from
/// the current partition and re-running SCORE on A / N_hat.
RScoreResult r_score(const AdjacencyMatrix& a, const RScoreConfig& cfg, const Partition* truth = nullptr);

/// Fraction of misclustered nodes, minimized over label permutations.
double hamming_error(const Partition& est, const Partition& truth);
/// Explicit search over all permutations (K <= 8).
double hamming_error_exhaustive(const Partition& est, const Partition& truth);
/// Maximum-weight matching on the confusion matrix.
double hamming_error_assignment(const Partition& est, const Partition& truth);

/// Minimum-cost perfect assignment on a square cost matrix. Returns the
/// column assigned to each row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

/// Exponents of the Hamming error bounds n^{-a0} (SCORE) and n^{-a1}
/// (R-SCORE) when theta_bar = n^{-beta}. beta must lie in (0, 1/2).
std::pair<double, double> rate_curves(double beta);

/// Realized values of the quantities in the theoretical conditions. Purely
/// informational.
struct ConditionReport {
  double balance_ratio = 0.0;       // min_k n_k / n
  double theta_spread = 0.0;        // max theta / min theta
  double theta_max_over_mean = 0.0;
  double theta_min_over_mean = 0.0;
  double lambda_min_P = 0.0;        // smallest |eigenvalue| of P
  double signal_strength = 0.0;     // sqrt(n) theta_bar |lambda_min(P)| / log(n)
  double calibrated_snr = 0.0;      // ||theta|| |lambda_min(P)|
  double eigen_gap_ratio = 0.0;     // (lambda1 - |lambda2|) / lambda1 of P Pi' Theta^2 Pi
  double eta_ratio = 0.0;           // max/min of its leading right eigenvector
  bool eta_positive = false;
  double snr = 0.0;                 // |lambda_K(tilde)| / sqrt(lambda_1(tilde))
  double nonlinearity_ratio = 0.0;  // ||(N - 11') o tilde|| / |lambda_K(tilde)|
  std::vector<std::string> violations;
};

ConditionReport check_conditions(const ModelParams& params);
std::string format_report(const ConditionReport& r);

/// Columns: iteration, hamming_error, lambda1, lambdaK, theta_hat_mean,
/// P_offdiag_mean. Missing values are written as empty fields.
void write_trace_csv(std::ostream& out, const RScoreTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const RScoreTrace& trace);

}  // namespace rscore
