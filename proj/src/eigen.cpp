#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <lapacke.h>
#include <spdlog/spdlog.h>

#include "rscore/errors.hpp"
#include "rscore/spectral.hpp"

namespace rscore {
namespace {

void check_k(std::size_t n, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw ConfigError(fmt::format("need 1 <= K <= n for eigenpairs, got K={} n={}", k, n));
  }
}

// Eigenvectors of the symmetric tridiagonal (d, e) for ascending indices
// il..iu (1-based), written into z (n x (iu - il + 1)).
bool tridiagonal_vectors(const std::vector<double>& d, const std::vector<double>& e, lapack_int il, lapack_int iu,
                         Eigen::Ref<Eigen::MatrixXd> z, Eigen::Ref<Eigen::VectorXd> w) {
  const auto n = static_cast<lapack_int>(d.size());
  std::vector<double> dd = d;
  std::vector<double> ee = e;
  ee.resize(static_cast<std::size_t>(n), 0.0);
  const lapack_int cnt = iu - il + 1;
  std::vector<double> wbuf(static_cast<std::size_t>(n));
  Eigen::MatrixXd zbuf(n, cnt);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(cnt));
  lapack_int found = 0;
  lapack_logical tryrac = 1;
  const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, dd.data(), ee.data(), 0.0, 0.0, il, iu, &found,
                                         wbuf.data(), zbuf.data(), n, cnt, isuppz.data(), &tryrac);
  if (info != 0 || found != cnt) return false;
  z = zbuf;
  for (lapack_int t = 0; t < cnt; ++t) w(t) = wbuf[static_cast<std::size_t>(t)];
  return true;
}

EigenPairs full_fallback(const Eigen::MatrixXd& sym, int k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  EigenPairs all{es.eigenvalues(), es.eigenvectors()};
  normalize_eigenpairs(all);
  return EigenPairs{all.values.head(k), all.vectors.leftCols(k)};
}

}  // namespace

void normalize_eigenpairs(EigenPairs& pairs) {
  const auto k = pairs.values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(pairs.values(a));
    const double mb = std::abs(pairs.values(b));
    if (ma != mb) return ma > mb;
    return pairs.values(a) > pairs.values(b);
  });
  Eigen::VectorXd values(k);
  Eigen::MatrixXd vectors(pairs.vectors.rows(), k);
  for (Eigen::Index t = 0; t < k; ++t) {
    values(t) = pairs.values(order[static_cast<std::size_t>(t)]);
    vectors.col(t) = pairs.vectors.col(order[static_cast<std::size_t>(t)]);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, t));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (vectors.rows() > 0 && vectors(arg, t) < 0.0) vectors.col(t) *= -1.0;
  }
  pairs.values = std::move(values);
  pairs.vectors = std::move(vectors);
}

EigenPairs top_k_eigenpairs_dense(const Eigen::MatrixXd& sym, int k) {
  const auto n = static_cast<std::size_t>(sym.rows());
  check_k(n, k);
  const auto ln = static_cast<lapack_int>(n);

  Eigen::MatrixXd a = sym;
  std::vector<double> d(n), e(std::max<std::size_t>(n, 1)), tau(std::max<std::size_t>(n, 1));
  if (LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', ln, a.data(), ln, d.data(), e.data(), tau.data()) != 0) {
    spdlog::warn("dsytrd failed, using full eigendecomposition");
    return full_fallback(sym, k);
  }

  // All eigenvalues of the tridiagonal (ascending) to decide which end each
  // of the k largest-magnitude eigenvalues comes from.
  std::vector<double> w = d;
  std::vector<double> ew(e.begin(), e.end());
  if (n > 1 && LAPACKE_dsterf(ln, w.data(), ew.data()) != 0) {
    spdlog::warn("dsterf failed, using full eigendecomposition");
    return full_fallback(sym, k);
  }
  std::size_t lo = 0;
  std::size_t hi = n;  // exclusive
  for (int t = 0; t < k; ++t) {
    if (std::abs(w[hi - 1]) >= std::abs(w[lo])) {
      --hi;
    } else {
      ++lo;
    }
  }
  const auto n_low = static_cast<Eigen::Index>(lo);
  const auto n_high = static_cast<Eigen::Index>(n - hi);

  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), k);
  Eigen::VectorXd values(k);
  bool ok = true;
  if (n_low > 0) {
    ok = ok && tridiagonal_vectors(d, e, 1, static_cast<lapack_int>(lo), z.leftCols(n_low), values.head(n_low));
  }
  if (n_high > 0) {
    ok = ok && tridiagonal_vectors(d, e, static_cast<lapack_int>(hi + 1), ln, z.rightCols(n_high),
                                   values.tail(n_high));
  }
  if (!ok) {
    spdlog::warn("dstemr failed, using full eigendecomposition");
    return full_fallback(sym, k);
  }
  if (LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', ln, k, a.data(), ln, tau.data(), z.data(), ln) != 0) {
    spdlog::warn("dormtr failed, using full eigendecomposition");
    return full_fallback(sym, k);
  }
  EigenPairs out{std::move(values), std::move(z)};
  normalize_eigenpairs(out);
  return out;
}

EigenPairs top_k_eigenpairs(const DenseSymMatrix& m, int k, const EigenOptions& opts) {
  check_k(m.dim(), k);
  if (m.dim() <= opts.dense_limit) return top_k_eigenpairs_dense(m.matrix(), k);
  const auto& mat = m.matrix();
  const SymOperator op = [&mat](std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    yv.noalias() = mat.selfadjointView<Eigen::Lower>() * xv;
  };
  return top_k_eigenpairs_lanczos(m.dim(), op, k, opts);
}

void WeightedAdjacency::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < a_->size(); ++i) {
    const auto nb = a_->neighbors(i);
    const double* w = w_.data() + offsets_[i];
    double s = 0.0;
    for (std::size_t t = 0; t < nb.size(); ++t) s += w[t] * x[nb[t]];
    y[i] = s;
  }
}

SymOperator WeightedAdjacency::op() const {
  return [this](std::span<const double> x, std::span<double> y) { multiply(x, y); };
}

DenseSymMatrix WeightedAdjacency::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < a_->size(); ++i) {
    const auto nb = a_->neighbors(i);
    for (std::size_t t = 0; t < nb.size(); ++t) {
      m(static_cast<Eigen::Index>(i), nb[t]) = w_[offsets_[i] + t];
    }
  }
  return DenseSymMatrix(std::move(m));
}

EigenPairs top_k_eigenpairs(const WeightedAdjacency& m, int k, const EigenOptions& opts) {
  check_k(m.size(), k);
  if (m.size() <= opts.dense_limit) return top_k_eigenpairs_dense(m.to_dense().matrix(), k);
  return top_k_eigenpairs_lanczos(m.size(), m.op(), k, opts);
}

}  // namespace rscore
