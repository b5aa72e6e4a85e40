#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rscore/errors.hpp"
#include "rscore/spectral.hpp"

namespace rscore {

ScoreEmbedding score_embedding(const EigenPairs& pairs, double clip) {
  const Eigen::Index n = pairs.vectors.rows();
  const Eigen::Index k = pairs.vectors.cols();
  if (k < 2) throw ConfigError(fmt::format("SCORE embedding needs K >= 2 eigenvectors, got {}", k));
  if (!(clip >= 0.0)) throw ConfigError(fmt::format("clip threshold must be non-negative, got {}", clip));
  const double threshold = clip == kAutoClip ? std::log(static_cast<double>(n)) : clip;
  const double boundary = std::isinf(threshold) ? std::log(static_cast<double>(n)) : threshold;

  ScoreEmbedding emb;
  emb.clip = threshold;
  emb.ratios.resize(n, k - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lead = pairs.vectors(i, 0);
    if (lead == 0.0) {
      emb.degenerate_nodes.push_back(static_cast<std::size_t>(i));
      for (Eigen::Index c = 1; c < k; ++c) emb.ratios(i, c - 1) = std::copysign(boundary, pairs.vectors(i, c));
      continue;
    }
    for (Eigen::Index c = 1; c < k; ++c) {
      emb.ratios(i, c - 1) = std::clamp(pairs.vectors(i, c) / lead, -threshold, threshold);
    }
  }
  if (!emb.degenerate_nodes.empty()) {
    spdlog::warn("SCORE: {} node(s) with zero leading-eigenvector entry placed on the clip boundary",
                 emb.degenerate_nodes.size());
  }
  return emb;
}

ScoreResult score_from_pairs(EigenPairs pairs, int k, Rng& rng, const ScoreOptions& opts,
                             const Eigen::MatrixXd& warm_start) {
  ScoreEmbedding emb = score_embedding(pairs, opts.clip);
  KMeansResult km = kmeans(emb.ratios, k, rng, opts.kmeans, warm_start);
  return ScoreResult{std::move(km.partition), std::move(pairs), std::move(emb), std::move(km.centroids)};
}

ScoreResult score_detailed(const DenseSymMatrix& m, int k, Rng& rng, const ScoreOptions& opts,
                           const Eigen::MatrixXd& warm_start) {
  return score_from_pairs(top_k_eigenpairs(m, k, opts.eigen), k, rng, opts, warm_start);
}

ScoreResult score_detailed(const WeightedAdjacency& m, int k, Rng& rng, const ScoreOptions& opts,
                           const Eigen::MatrixXd& warm_start) {
  return score_from_pairs(top_k_eigenpairs(m, k, opts.eigen), k, rng, opts, warm_start);
}

Partition score(const DenseSymMatrix& m, int k, Rng& rng, const ScoreOptions& opts) {
  return score_detailed(m, k, rng, opts).partition;
}

}  // namespace rscore
