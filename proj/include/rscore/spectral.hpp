#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rscore/graph.hpp"
#include "rscore/matrix.hpp"
#include "rscore/partition.hpp"
#include "rscore/rng.hpp"

namespace rscore {

/// Leading eigenpairs ordered by decreasing |value|; magnitude ties are
/// ordered by signed value (descending). Each column's largest-magnitude
/// entry (lowest index on ties) is positive.
struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

struct EigenOptions {
  /// Matrices up to this dimension use dense tridiagonalization; larger ones
  /// use restarted Lanczos.
  std::size_t dense_limit = 4096;
  double lanczos_tol = 1e-11;
  int lanczos_max_restarts = 500;
};

/// y = M x for a symmetric operator M.
using SymOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

EigenPairs top_k_eigenpairs(const DenseSymMatrix& m, int k, const EigenOptions& opts = {});

/// Dense route regardless of size.
EigenPairs top_k_eigenpairs_dense(const Eigen::MatrixXd& sym, int k);

/// Thick-restart Lanczos for the k eigenvalues of largest magnitude.
/// `seed` fixes the start vector.
EigenPairs top_k_eigenpairs_lanczos(std::size_t n, const SymOperator& op, int k, const EigenOptions& opts = {},
                                    std::uint64_t seed = 0x5C0AE);

/// Sorts by the magnitude order above and applies the sign convention.
void normalize_eigenpairs(EigenPairs& pairs);

/// Symmetric matrix with the sparsity of an adjacency matrix; one weight per
/// stored (i, j) entry in neighbor-list order.
class WeightedAdjacency {
 public:
  /// weight(i, j) is evaluated once per edge (i < j) and mirrored.
  template <class F>
  WeightedAdjacency(const AdjacencyMatrix& a, F&& weight) : a_(&a), w_(2 * a.edge_count()) {
    std::size_t pos = 0;
    offsets_.resize(a.size() + 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      offsets_[i] = pos;
      pos += a.degree(i);
    }
    offsets_[a.size()] = pos;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto nb = a.neighbors(i);
      for (std::size_t t = 0; t < nb.size(); ++t) {
        const std::size_t j = nb[t];
        if (j < i) continue;
        const double v = weight(i, j);
        w_[offsets_[i] + t] = v;
        // position of i inside j's sorted list
        const auto nbj = a.neighbors(j);
        const auto it = std::lower_bound(nbj.begin(), nbj.end(), static_cast<std::uint32_t>(i));
        w_[offsets_[j] + static_cast<std::size_t>(it - nbj.begin())] = v;
      }
    }
  }

  std::size_t size() const noexcept { return a_->size(); }
  void multiply(std::span<const double> x, std::span<double> y) const;
  SymOperator op() const;
  DenseSymMatrix to_dense() const;

 private:
  const AdjacencyMatrix* a_;
  std::vector<double> w_;
  std::vector<std::size_t> offsets_;
};

EigenPairs top_k_eigenpairs(const WeightedAdjacency& m, int k, const EigenOptions& opts = {});

/// Entry-wise ratios xi_k / xi_1, k = 2..K, clipped to [-clip, clip].
struct ScoreEmbedding {
  Eigen::MatrixXd ratios;
  double clip = std::numeric_limits<double>::infinity();
  /// Nodes whose leading-eigenvector entry was exactly zero.
  std::vector<std::size_t> degenerate_nodes;
};

/// Use log(n) as the clip threshold.
inline constexpr double kAutoClip = 0.0;
/// Do not clip.
inline constexpr double kNoClip = std::numeric_limits<double>::infinity();

/// `clip` is a positive threshold, kAutoClip or kNoClip. A zero leading entry
/// puts the row on the clip boundary (log(n) when clipping is off) with the
/// sign of the numerator.
ScoreEmbedding score_embedding(const EigenPairs& pairs, double clip = kAutoClip);

struct KMeansOptions {
  int restarts = 100;
  int max_iter = 300;
  double tol = 1e-9;
};

struct KMeansResult {
  /// Canonical labels: communities numbered in order of first appearance.
  Partition partition;
  Eigen::MatrixXd centroids;
  double objective = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding; keeps the restart with the
/// smallest within-cluster sum of squares. Rows of `points` are observations.
/// `warm_start` (k x d), when non-empty, replaces the seeding of restart 0.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, Rng& rng, const KMeansOptions& opts = {},
                    const Eigen::MatrixXd& warm_start = {});

/// Within-cluster sum of squares of a labeling.
double kmeans_objective(const Eigen::MatrixXd& points, const Partition& labels);

struct ScoreOptions {
  double clip = kAutoClip;
  KMeansOptions kmeans;
  EigenOptions eigen;
};

struct ScoreResult {
  Partition partition;
  EigenPairs pairs;
  ScoreEmbedding embedding;
  Eigen::MatrixXd centroids;
};

/// SCORE: leading K eigenvectors, ratio embedding, k-means on its rows.
ScoreResult score_detailed(const DenseSymMatrix& m, int k, Rng& rng, const ScoreOptions& opts = {},
                           const Eigen::MatrixXd& warm_start = {});
ScoreResult score_detailed(const WeightedAdjacency& m, int k, Rng& rng, const ScoreOptions& opts = {},
                           const Eigen::MatrixXd& warm_start = {});

Partition score(const DenseSymMatrix& m, int k, Rng& rng, const ScoreOptions& opts = {});

/// SCORE on the rows of an embedding that has already been computed.
ScoreResult score_from_pairs(EigenPairs pairs, int k, Rng& rng, const ScoreOptions& opts,
                             const Eigen::MatrixXd& warm_start = {});

}  // namespace rscore
