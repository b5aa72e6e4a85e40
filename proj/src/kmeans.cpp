#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rscore/errors.hpp"
#include "rscore/spectral.hpp"

namespace rscore {
namespace {

struct Run {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double objective = std::numeric_limits<double>::infinity();
};

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd c(k, x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 = (x.rowwise() - c.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (u < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    c.row(j) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - c.row(j)).rowwise().squaredNorm());
  }
  return c;
}

// One Lloyd run from the given centroids.
Run lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd c, const KMeansOptions& opts) {
  const Eigen::Index n = x.rows();
  const auto k = static_cast<int>(c.rows());
  Run run;
  run.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<double> dist(static_cast<std::size_t>(n));
  double prev = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = (x.row(i) - c.row(j)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      auto& l = run.labels[static_cast<std::size_t>(i)];
      if (l != best) changed = true;
      l = best;
      dist[static_cast<std::size_t>(i)] = bd;
    }

    // Empty clusters take the point farthest from its own centroid.
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (const int l : run.labels) ++counts[static_cast<std::size_t>(l)];
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] != 0) continue;
      Eigen::Index far = -1;
      double fd = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        if (counts[static_cast<std::size_t>(run.labels[si])] > 1 && dist[si] > fd) {
          fd = dist[si];
          far = i;
        }
      }
      if (far < 0) continue;  // every point sits on its centroid
      const auto sf = static_cast<std::size_t>(far);
      --counts[static_cast<std::size_t>(run.labels[sf])];
      run.labels[sf] = j;
      counts[static_cast<std::size_t>(j)] = 1;
      dist[sf] = 0.0;
      changed = true;
    }

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) sums.row(run.labels[static_cast<std::size_t>(i)]) += x.row(i);
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) c.row(j) = sums.row(j) / static_cast<double>(counts[static_cast<std::size_t>(j)]);
    }
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) obj += (x.row(i) - c.row(run.labels[static_cast<std::size_t>(i)])).squaredNorm();
    run.objective = obj;
    if (!changed || prev - obj <= opts.tol * prev) break;
    prev = obj;
  }
  run.centroids = std::move(c);
  return run;
}

}  // namespace

double kmeans_objective(const Eigen::MatrixXd& points, const Partition& labels) {
  const int k = labels.num_communities();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
  const auto sizes = labels.community_sizes();
  for (Eigen::Index i = 0; i < points.rows(); ++i) sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
  double obj = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    obj += (points.row(i) - sums.row(l) / static_cast<double>(sizes[static_cast<std::size_t>(l)])).squaredNorm();
  }
  return obj;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, Rng& rng, const KMeansOptions& opts,
                    const Eigen::MatrixXd& warm_start) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw ConfigError(fmt::format("k-means needs K >= 1, got {}", k));
  if (n < k) throw ConfigError(fmt::format("k-means needs at least K={} points, got {}", k, n));
  if (opts.restarts < 1) throw ConfigError("k-means needs at least one restart");
  if (warm_start.size() > 0 && (warm_start.rows() != k || warm_start.cols() != points.cols())) {
    throw ConfigError("warm-start centroids have the wrong shape");
  }

  // Each restart owns a child stream so restarts are order-independent.
  const Rng base = rng.split(rng());
  Run best;
  for (int r = 0; r < opts.restarts; ++r) {
    Rng child = base.split(static_cast<std::uint64_t>(r));
    Eigen::MatrixXd seeds = (r == 0 && warm_start.size() > 0) ? warm_start : plus_plus_seeds(points, k, child);
    Run run = lloyd(points, std::move(seeds), opts);
    if (run.objective < best.objective) best = std::move(run);
  }

  Partition canon = Partition(best.labels, k).canonical();
  // Reorder centroids to match the canonical labels.
  Eigen::MatrixXd centroids = best.centroids;
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  int next = 0;
  for (std::size_t i = 0; i < best.labels.size(); ++i) {
    const int old = best.labels[i];
    if (!seen[static_cast<std::size_t>(old)]) {
      seen[static_cast<std::size_t>(old)] = true;
      centroids.row(canon[i]) = best.centroids.row(old);
      ++next;
    }
  }
  // Communities that ended up empty keep their centroids in the unused slots.
  for (int old = 0; old < k && next < k; ++old) {
    if (!seen[static_cast<std::size_t>(old)]) centroids.row(next++) = best.centroids.row(old);
  }
  return KMeansResult{std::move(canon), std::move(centroids), best.objective};
}

}  // namespace rscore
