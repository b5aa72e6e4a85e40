// Thick-restart Lanczos with full reorthogonalization.
//
// The basis V is kept explicitly together with W = A V, so the projected
// matrix is formed as V'W and every restart is a plain Rayleigh-Ritz step.
// On restart the wanted Ritz vectors (and a few extra) are kept, and the
// basis is continued from the component of A v_last orthogonal to V; all
// kept Ritz residuals are parallel to that vector, so the space stays Krylov.

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rscore/errors.hpp"
#include "rscore/spectral.hpp"

namespace rscore {
namespace {

// Orthogonalizes x against the first `cols` columns of v (two passes of
// classical Gram-Schmidt) and returns the remaining norm.
double orthogonalize(const Eigen::MatrixXd& v, Eigen::Index cols, Eigen::VectorXd& x) {
  for (int pass = 0; pass < 2; ++pass) {
    if (cols == 0) break;
    const Eigen::VectorXd c = v.leftCols(cols).transpose() * x;
    x.noalias() -= v.leftCols(cols) * c;
  }
  return x.norm();
}

Eigen::VectorXd random_unit(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.uniform(-1.0, 1.0);
  return x / x.norm();
}

EigenPairs dense_from_operator(std::size_t n, const SymOperator& op, int k) {
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m(nn, nn);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(nn);
  Eigen::VectorXd y(nn);
  for (Eigen::Index j = 0; j < nn; ++j) {
    e(j) = 1.0;
    op(std::span<const double>(e.data(), n), std::span<double>(y.data(), n));
    m.col(j) = y;
    e(j) = 0.0;
  }
  m = 0.5 * (m + m.transpose()).eval();
  return top_k_eigenpairs_dense(m, k);
}

}  // namespace

EigenPairs top_k_eigenpairs_lanczos(std::size_t n, const SymOperator& op, int k, const EigenOptions& opts,
                                    std::uint64_t seed) {
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw ConfigError(fmt::format("need 1 <= K <= n for eigenpairs, got K={} n={}", k, n));
  }
  const auto nn = static_cast<Eigen::Index>(n);
  const Eigen::Index ncv = std::min<Eigen::Index>(nn, std::max<Eigen::Index>(2 * k + 1, k + 24));
  if (ncv >= nn - 1) return dense_from_operator(n, op, k);
  const Eigen::Index keep = std::min<Eigen::Index>(ncv - 2, k + (ncv - k) / 2);

  Rng rng(seed);
  Eigen::MatrixXd v(nn, ncv);
  Eigen::MatrixXd w(nn, ncv);
  v.col(0) = random_unit(nn, rng);
  Eigen::Index filled = 0;  // columns of v whose A-image is in w
  Eigen::Index basis = 1;   // orthonormal columns of v

  auto apply = [&](Eigen::Index j) {
    op(std::span<const double>(v.col(j).data(), n), std::span<double>(w.col(j).data(), n));
  };

  Eigen::VectorXd theta;
  Eigen::MatrixXd ritz;
  for (int restart = 0; restart <= opts.lanczos_max_restarts; ++restart) {
    // Expand to ncv columns.
    while (true) {
      for (; filled < basis; ++filled) apply(filled);
      if (basis == ncv) break;
      Eigen::VectorXd x = w.col(basis - 1);
      const double scale = std::max(x.norm(), 1e-300);
      double nrm = orthogonalize(v, basis, x);
      if (nrm <= 1e-10 * scale) {
        // Invariant subspace: continue from a fresh random direction.
        x = random_unit(nn, rng);
        nrm = orthogonalize(v, basis, x);
      }
      v.col(basis) = x / nrm;
      ++basis;
    }

    Eigen::MatrixXd h = v.transpose() * w;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(ncv));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double ma = std::abs(es.eigenvalues()(a));
      const double mb = std::abs(es.eigenvalues()(b));
      if (ma != mb) return ma > mb;
      return es.eigenvalues()(a) > es.eigenvalues()(b);
    });
    Eigen::MatrixXd s(ncv, keep);
    theta.resize(keep);
    for (Eigen::Index t = 0; t < keep; ++t) {
      s.col(t) = es.eigenvectors().col(order[static_cast<std::size_t>(t)]);
      theta(t) = es.eigenvalues()(order[static_cast<std::size_t>(t)]);
    }
    ritz = v * s;
    const Eigen::MatrixXd aritz = w * s;
    const double anorm = std::max(std::abs(theta(0)), 1e-300);
    bool converged = true;
    for (Eigen::Index t = 0; t < k; ++t) {
      const double res = (aritz.col(t) - theta(t) * ritz.col(t)).norm();
      if (res > opts.lanczos_tol * anorm) {
        converged = false;
        break;
      }
    }
    if (converged) {
      EigenPairs out{theta.head(k), ritz.leftCols(k)};
      normalize_eigenpairs(out);
      return out;
    }

    // Continuation vector: A v_last minus its projection on V.
    Eigen::VectorXd f = w.col(ncv - 1);
    const double fscale = std::max(f.norm(), 1e-300);
    double fn = orthogonalize(v, ncv, f);
    v.leftCols(keep) = ritz;
    w.leftCols(keep) = aritz;
    if (fn <= 1e-10 * fscale) {
      f = random_unit(nn, rng);
      fn = orthogonalize(v, keep, f);
    } else {
      fn = orthogonalize(v, keep, f);
    }
    v.col(keep) = f / fn;
    filled = keep;
    basis = keep + 1;
  }
  spdlog::warn("Lanczos did not converge after {} restarts (n={}, K={})", opts.lanczos_max_restarts, n, k);
  EigenPairs out{theta.head(k), ritz.leftCols(k)};
  normalize_eigenpairs(out);
  return out;
}

}  // namespace rscore
