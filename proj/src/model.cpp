#include "rscore/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "rscore/errors.hpp"

namespace rscore {

void ModelParams::validate() const {
  if (theta.size() == 0) throw ConfigError("model has no nodes");
  if (pi.size() != n()) {
    throw ConfigError(fmt::format("partition has {} labels for {} nodes", pi.size(), n()));
  }
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!(theta(i) > 0.0) || !std::isfinite(theta(i))) {
      throw ConfigError(fmt::format("theta[{}] = {} is not positive", i, theta(i)));
    }
  }
  const int k = pi.num_communities();
  if (P.rows() != k || P.cols() != k) {
    throw ConfigError(fmt::format("P is {}x{}, expected {}x{}", P.rows(), P.cols(), k, k));
  }
  for (int a = 0; a < k; ++a) {
    if (P(a, a) != 1.0) throw ConfigError(fmt::format("P[{},{}] = {}, must be 1", a, a, P(a, a)));
    for (int b = 0; b < k; ++b) {
      if (P(a, b) < 0.0) throw ConfigError(fmt::format("P[{},{}] is negative", a, b));
      if (P(a, b) != P(b, a)) throw ConfigError(fmt::format("P not symmetric at ({}, {})", a, b));
    }
  }
  if (!pi.all_nonempty()) throw ConfigError("every community must be non-empty");
}

ThetaSpec ThetaSpec::uniform(double lo, double hi, double b_n) {
  ThetaSpec s;
  s.kind = Kind::uniform;
  s.lo = lo;
  s.hi = hi;
  s.b_n = b_n;
  return s;
}

ThetaSpec ThetaSpec::pareto(double scale, double shape, double truncation, double b_n) {
  ThetaSpec s;
  s.kind = Kind::pareto;
  s.scale = scale;
  s.shape = shape;
  s.truncation = truncation;
  s.b_n = b_n;
  return s;
}

void ThetaSpec::validate() const {
  if (!(b_n > 0.0)) throw ConfigError(fmt::format("b_n must be positive, got {}", b_n));
  if (kind == Kind::uniform) {
    // lo == hi is accepted: a point mass gives equal degrees.
    if (!(lo > 0.0) || !(hi >= lo)) {
      throw ConfigError(fmt::format("uniform theta needs 0 < lo <= hi, got ({}, {})", lo, hi));
    }
  } else {
    if (!(scale > 0.0) || !(shape > 0.0) || !(truncation > 0.0)) {
      throw ConfigError(fmt::format("pareto theta needs positive scale/shape/truncation, got ({}, {}, {})",
                                    scale, shape, truncation));
    }
  }
}

Partition gen_partition(std::size_t n, std::span<const std::size_t> sizes, Rng* shuffle) {
  if (sizes.empty()) throw ConfigError("need at least one community size");
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total != n) throw ConfigError(fmt::format("community sizes sum to {}, expected n={}", total, n));
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] == 0) throw ConfigError(fmt::format("community {} is empty", k + 1));
    labels.insert(labels.end(), sizes[k], static_cast<int>(k));
  }
  if (shuffle != nullptr) shuffle->shuffle(std::span<int>(labels));
  return Partition(std::move(labels), static_cast<int>(sizes.size()));
}

Eigen::VectorXd gen_theta(const ThetaSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  if (n == 0) throw ConfigError("cannot draw theta for zero nodes");
  Eigen::VectorXd raw(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (spec.kind == ThetaSpec::Kind::uniform) {
      raw(i) = spec.lo == spec.hi ? spec.lo : rng.uniform(spec.lo, spec.hi);
    } else {
      // Inverse CDF; 1 - u lies in (0, 1].
      const double u = 1.0 - rng.uniform();
      raw(i) = std::min(spec.scale / std::pow(u, 1.0 / spec.shape), spec.truncation);
    }
  }
  return raw * (spec.b_n / raw.norm());
}

Eigen::MatrixXd uniform_offdiag_mixing(int k, double beta) {
  if (k < 1) throw ConfigError("K must be positive");
  if (beta < 0.0 || beta > 1.0) throw ConfigError(fmt::format("beta must lie in [0, 1], got {}", beta));
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(k, k, beta);
  p.diagonal().setOnes();
  return p;
}

Eigen::MatrixXd two_block_mixing(int k, double beta1, double beta2) {
  if (k < 2 || k % 2 != 0) throw ConfigError(fmt::format("two-block mixing needs even K, got {}", k));
  if (beta1 < 0.0 || beta2 < 0.0) throw ConfigError("two-block betas must be non-negative");
  const int h = k / 2;
  Eigen::MatrixXd p(k, k);
  Eigen::MatrixXd p1 = Eigen::MatrixXd::Constant(h, h, 0.5 * beta1);
  p1.diagonal().setOnes();
  const Eigen::MatrixXd p2 = Eigen::MatrixXd::Constant(h, h, 0.5 * (beta1 + beta2));
  p << p1, p2, p2, p1;
  return p;
}

DenseSymMatrix build_tilde_omega(const ModelParams& params) {
  params.validate();
  const auto& theta = params.theta;
  const auto& pi = params.pi;
  return DenseSymMatrix::from_upper(params.n(), [&](std::size_t i, std::size_t j) {
    return theta(static_cast<Eigen::Index>(i)) * theta(static_cast<Eigen::Index>(j)) * params.P(pi[i], pi[j]);
  });
}

LogitMean logit_link(const DenseSymMatrix& tilde) {
  const auto& t = tilde.matrix();
  if (t.size() > 0 && t.minCoeff() < 0.0) {
    throw DomainError(fmt::format("logit link needs non-negative entries, found {}", t.minCoeff()));
  }
  const std::size_t n = tilde.dim();
  return LogitMean{
      DenseSymMatrix::from_upper(n, [&](std::size_t i, std::size_t j) { return tilde(i, j) / (1.0 + tilde(i, j)); }),
      DenseSymMatrix::from_upper(n, [&](std::size_t i, std::size_t j) { return 1.0 / (1.0 + tilde(i, j)); }),
  };
}

AdjacencyMatrix sample_adjacency(const DenseSymMatrix& omega, Rng& rng) {
  const std::size_t n = omega.dim();
  const auto& m = omega.matrix();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (!(m(i, j) >= 0.0 && m(i, j) <= 1.0)) {
        throw DomainError(fmt::format("edge probability ({}, {}) = {} outside [0, 1]", i, j, m(i, j)));
      }
    }
  }
  AdjacencyBuilder b(n);
  // Row-major over the upper triangle so the draw order is independent of storage.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < omega(i, j)) b.add(i, j);
    }
  }
  return std::move(b).finish();
}

double min_abs_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().minCoeff();
}

double snr(double b_n, const Eigen::MatrixXd& P) { return b_n * min_abs_eigenvalue(P); }

}  // namespace rscore
