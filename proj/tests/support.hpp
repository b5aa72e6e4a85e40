#pragma once

// Independent reference implementations used as test oracles.

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "rscore/graph.hpp"
#include "rscore/model.hpp"
#include "rscore/rng.hpp"

namespace rscore::test {

/// Random logit-DCBM parameters: uniform theta on [lo, hi], random
/// community sizes (each >= min_size) and symmetric P with off-diagonal
/// entries in [0, pmax].
inline ModelParams random_params(Rng& rng, std::size_t n, int k, double lo = 0.2, double hi = 1.5,
                                 double pmax = 0.8, std::size_t min_size = 3) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), min_size);
  for (std::size_t i = min_size * static_cast<std::size_t>(k); i < n; ++i) ++sizes[rng.below(static_cast<std::uint64_t>(k))];
  ModelParams p;
  p.pi = gen_partition(n, sizes, &rng);
  p.theta.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta(i) = rng.uniform(lo, hi);
  p.P = Eigen::MatrixXd::Identity(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) p.P(a, b) = p.P(b, a) = rng.uniform(0.0, pmax);
  }
  return p;
}

inline AdjacencyMatrix random_graph(Rng& rng, std::size_t n, double density) {
  AdjacencyBuilder b(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < density) b.add(i, j);
    }
  }
  return std::move(b).finish();
}

/// Cyclic Jacobi rotations; returns all eigenvalues (unsorted) and
/// eigenvectors as columns.
inline void jacobi_eigen(Eigen::MatrixXd a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index n = a.rows();
  vectors = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30 * (a.squaredNorm() + 1e-300)) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  values = a.diagonal();
}

/// Brute-force alternating cycle sums over ordered distinct tuples in s,
/// for a 0/1 or probability matrix w.
inline std::pair<double, double> brute_cycles(const Eigen::MatrixXd& w, std::size_t i, const std::vector<std::size_t>& s,
                                              int m) {
  double phi1 = 0.0, phi2 = 0.0;
  std::vector<std::size_t> path{i};
  std::vector<bool> used(s.size(), false);
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(path.size()) == m) {
      double a = 1.0, b = 1.0;
      for (int step = 1; step <= m; ++step) {
        const double e = w(static_cast<Eigen::Index>(path[static_cast<std::size_t>(step - 1)]),
                           static_cast<Eigen::Index>(path[static_cast<std::size_t>(step % m)]));
        a *= step % 2 == 1 ? e : 1.0 - e;
        b *= step % 2 == 1 ? 1.0 - e : e;
      }
      phi1 += a;
      phi2 += b;
      return;
    }
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (used[t]) continue;
      used[t] = true;
      path.push_back(s[t]);
      self(self);
      path.pop_back();
      used[t] = false;
    }
  };
  rec(rec);
  return {phi1, phi2};
}

}  // namespace rscore::test
