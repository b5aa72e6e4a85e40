#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rscore/graph.hpp"
#include "rscore/matrix.hpp"
#include "rscore/partition.hpp"
#include "rscore/rng.hpp"

namespace rscore {

/// Ground truth of a logit-DCBM: degree parameters, memberships and a
/// symmetric non-negative mixing matrix with unit diagonal.
struct ModelParams {
  Eigen::VectorXd theta;
  Partition pi;
  Eigen::MatrixXd P;

  std::size_t n() const noexcept { return static_cast<std::size_t>(theta.size()); }
  int k() const noexcept { return pi.num_communities(); }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Distribution of the raw degree draws and the target norm after scaling.
struct ThetaSpec {
  enum class Kind { uniform, pareto };

  Kind kind = Kind::uniform;
  double lo = 0.0;
  double hi = 1.0;
  double scale = 1.0;
  double shape = 1.0;
  double truncation = 0.0;
  double b_n = 1.0;

  static ThetaSpec uniform(double lo, double hi, double b_n);
  /// Pareto with minimum `scale` and tail index `shape`, clamped at `truncation`.
  static ThetaSpec pareto(double scale, double shape, double truncation, double b_n);

  void validate() const;
};

/// Block assignment: the first sizes[0] nodes get label 0, and so on. When
/// `shuffle` is given the node order is permuted with it.
Partition gen_partition(std::size_t n, std::span<const std::size_t> sizes, Rng* shuffle = nullptr);

/// Draws n raw values from the spec and rescales them to Euclidean norm b_n.
Eigen::VectorXd gen_theta(const ThetaSpec& spec, std::size_t n, Rng& rng);

/// P = beta * 11' + (1 - beta) I.
Eigen::MatrixXd uniform_offdiag_mixing(int k, double beta);
/// P = [P1 P2; P2 P1] with P1 = 0.5 b1 11' + (1 - 0.5 b1) I and
/// P2 = 0.5 (b1 + b2) 11'. K must be even.
Eigen::MatrixXd two_block_mixing(int k, double beta1, double beta2);

/// (i, j) -> theta_i theta_j P[pi_i, pi_j], diagonal included.
DenseSymMatrix build_tilde_omega(const ModelParams& params);

struct LogitMean {
  DenseSymMatrix omega;
  DenseSymMatrix nfactor;
};

/// omega = tilde / (1 + tilde), nfactor = 1 / (1 + tilde), entry-wise.
LogitMean logit_link(const DenseSymMatrix& tilde);

/// Independent Bernoulli(omega_ij) for i < j, mirrored; diagonal ignored.
AdjacencyMatrix sample_adjacency(const DenseSymMatrix& omega, Rng& rng);

/// b_n times the smallest eigenvalue of P in magnitude.
double snr(double b_n, const Eigen::MatrixXd& P);

/// Smallest |eigenvalue| of a symmetric matrix.
double min_abs_eigenvalue(const Eigen::MatrixXd& sym);

}  // namespace rscore
