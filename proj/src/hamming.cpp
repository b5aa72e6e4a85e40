#include <algorithm>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "rscore/errors.hpp"
#include "rscore/pipeline.hpp"

namespace rscore {
namespace {

// C(a, b) = #{i : est_i = a, truth_i = b}, padded to a square.
Eigen::MatrixXd confusion(const Partition& est, const Partition& truth) {
  if (est.size() != truth.size()) {
    throw ConfigError(fmt::format("partitions differ in length: {} vs {}", est.size(), truth.size()));
  }
  const int k = std::max(est.num_communities(), truth.num_communities());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < est.size(); ++i) c(est[i], truth[i]) += 1.0;
  return c;
}

}  // namespace

double hamming_error_exhaustive(const Partition& est, const Partition& truth) {
  const Eigen::MatrixXd c = confusion(est, truth);
  if (est.size() == 0) return 0.0;
  const auto k = static_cast<int>(c.rows());
  if (k > 8) throw ConfigError(fmt::format("exhaustive matching limited to K <= 8, got {}", k));
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double hit = 0.0;
    for (int b = 0; b < k; ++b) hit += c(perm[static_cast<std::size_t>(b)], b);
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return 1.0 - best / static_cast<double>(est.size());
}

double hamming_error_assignment(const Partition& est, const Partition& truth) {
  const Eigen::MatrixXd c = confusion(est, truth);
  if (est.size() == 0) return 0.0;
  const auto match = solve_assignment(-c);
  double hit = 0.0;
  for (Eigen::Index r = 0; r < c.rows(); ++r) hit += c(r, match[static_cast<std::size_t>(r)]);
  return 1.0 - hit / static_cast<double>(est.size());
}

double hamming_error(const Partition& est, const Partition& truth) {
  if (std::max(est.num_communities(), truth.num_communities()) <= 8) return hamming_error_exhaustive(est, truth);
  return hamming_error_assignment(est, truth);
}

// Hungarian method with potentials, O(k^3).
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw ConfigError("assignment cost matrix must be square");
  const auto k = static_cast<std::size_t>(cost.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<std::size_t> p(k + 1, 0), way(k + 1, 0);
  for (std::size_t i = 1; i <= k; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(k + 1, inf);
    std::vector<bool> used(k + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= k; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(k, 0);
  for (std::size_t j = 1; j <= k; ++j) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  return row_to_col;
}

}  // namespace rscore
