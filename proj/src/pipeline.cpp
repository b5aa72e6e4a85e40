#include "rscore/pipeline.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rscore/errors.hpp"
#include "rscore/io.hpp"

namespace rscore {
namespace {

IterationRecord make_record(int iteration, const Partition& part, const EigenPairs& pairs, const Partition* truth) {
  IterationRecord rec;
  rec.iteration = iteration;
  rec.partition = part;
  rec.lambda1 = pairs.values(0);
  rec.lambdaK = pairs.values(pairs.values.size() - 1);
  if (truth != nullptr) rec.hamming = hamming_error(part, *truth);
  return rec;
}

// Mean of the embedding rows inside each community of `part`.
Eigen::MatrixXd group_means(const Eigen::MatrixXd& rows, const Partition& part) {
  const int k = part.num_communities();
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, rows.cols());
  const auto sizes = part.community_sizes();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) means.row(part[static_cast<std::size_t>(i)]) += rows.row(i);
  for (int c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) means.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
  }
  return means;
}

}  // namespace

Rng round_rng(std::uint64_t seed, const Partition* previous) {
  const Rng master(seed);
  return previous == nullptr ? master.split("initial") : master.split(previous->fingerprint());
}

ScoreResult score_adjacency(const AdjacencyMatrix& a, int k, Rng& rng, const ScoreOptions& opts) {
  return score_renormalized(a, [](std::size_t, std::size_t) { return 1.0; }, k, rng, opts);
}

RScoreResult r_score(const AdjacencyMatrix& a, const RScoreConfig& cfg, const Partition* truth) {
  const std::size_t n = a.size();
  if (cfg.k < 2) throw ConfigError(fmt::format("R-SCORE needs K >= 2, got {}", cfg.k));
  if (n < 3 * static_cast<std::size_t>(cfg.k)) {
    throw ConfigError(fmt::format("R-SCORE needs n >= 3K, got n={} K={}", n, cfg.k));
  }
  if (cfg.iterations < 0) throw ConfigError("iteration count must be non-negative");
  if (truth != nullptr && truth->size() != n) {
    throw ConfigError(fmt::format("truth has {} labels for {} nodes", truth->size(), n));
  }

  RScoreResult out;
  Rng rng0 = round_rng(cfg.seed, nullptr);
  ScoreResult first = score_adjacency(a, cfg.k, rng0, cfg.score);
  out.trace.records.push_back(make_record(0, first.partition, first.pairs, truth));
  Partition current = first.partition;

  for (int m = 1; m <= cfg.iterations; ++m) {
    std::optional<FitBundle> fit;
    try {
      fit = refit(a, current, RefitOptions{cfg.cycle_order, std::nullopt});
    } catch (const EstimationError& e) {
      out.trace.stop_reason = fmt::format("refit failed at iteration {}: {}", m, e.what());
      spdlog::warn("R-SCORE: {}; keeping the partition from iteration {}", out.trace.stop_reason, m - 1);
      break;
    }
    Rng rng = round_rng(cfg.seed, &current);
    WeightedAdjacency renorm(a, [&](std::size_t i, std::size_t j) { return 1.0 / fit->n_hat(i, j); });
    EigenPairs pairs = top_k_eigenpairs(renorm, cfg.k, cfg.score.eigen);
    Eigen::MatrixXd warm;
    if (cfg.warm_start) warm = group_means(score_embedding(pairs, cfg.score.clip).ratios, current);
    ScoreResult s = score_from_pairs(std::move(pairs), cfg.k, rng, cfg.score, warm);

    IterationRecord rec = make_record(m, s.partition, s.pairs, truth);
    rec.fit = std::move(fit);
    out.trace.records.push_back(std::move(rec));
    const bool fixed = s.partition == current;
    current = s.partition;
    if (cfg.early_stop && fixed) {
      if (m < cfg.iterations) out.trace.stop_reason = fmt::format("fixed point at iteration {}", m);
      break;
    }
  }
  out.partition = current;
  return out;
}

void write_trace_csv(std::ostream& out, const RScoreTrace& trace) {
  out << "iteration,hamming_error,lambda1,lambdaK,theta_hat_mean,P_offdiag_mean\n";
  for (const auto& r : trace.records) {
    out << r.iteration << ',';
    if (r.hamming) out << io::format_double(*r.hamming);
    out << ',' << io::format_double(r.lambda1) << ',' << io::format_double(r.lambdaK) << ',';
    if (r.fit) {
      const auto& p = r.fit->P_hat;
      const auto k = p.rows();
      const double off = k > 1 ? (p.sum() - p.trace()) / static_cast<double>(k * (k - 1)) : 0.0;
      out << io::format_double(r.fit->theta_hat.mean()) << ',' << io::format_double(off);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const RScoreTrace& trace) {
  auto out = io::open_output(path);
  write_trace_csv(out, trace);
}

std::pair<double, double> rate_curves(double beta) {
  if (!(beta > 0.0 && beta < 0.5)) throw DomainError(fmt::format("beta must lie in (0, 1/2), got {}", beta));
  // At the break points both branches agree; the 1 - 2 beta branch is taken
  // there so the two exponents coincide bit-for-bit from 1/6 on.
  const double a0 = beta < 1.0 / 6.0 ? 4.0 * beta : 1.0 - 2.0 * beta;
  const double a1 = beta <= 1.0 / 8.0 ? 6.0 * beta : 1.0 - 2.0 * beta;
  return {a0, a1};
}

}  // namespace rscore
