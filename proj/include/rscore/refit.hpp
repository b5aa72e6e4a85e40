#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rscore/graph.hpp"
#include "rscore/matrix.hpp"
#include "rscore/partition.hpp"

namespace rscore {

// Ratio estimators in which the nonlinear factors N_ij = 1 / (1 + tilde_ij)
// cancel between a numerator and a denominator sum. Every estimator has an
// overload taking a DenseSymMatrix of edge probabilities in place of the
// binary adjacency; fed the true mean matrix, those overloads recover the
// model parameters exactly.

/// Alternating-cycle sums through a fixed node.
///
/// For odd m and anchor i, with j_1..j_{m-1} distinct in S:
///   phi1 = sum A(i,j1) (1-A(j1,j2)) A(j2,j3) ... (1-A) A(j_{m-1},i)
///   phi2 = sum (1-A(i,j1)) A(j1,j2) (1-A(j2,j3)) ... A (1-A(j_{m-1},i))
/// Ordered index tuples are counted, so each undirected cycle appears twice.
struct CycleCounts {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

/// m = 3 counts from degrees and triangles:
///   phi1 = d (d - 1) - t,  phi2 = 2 e(S) - 2 sum_{j in N} deg_S(j) + t
/// with N the neighbors of i in S, d = |N|, t the ordered triangle count
/// through i inside S. `S` must not contain i.
CycleCounts cycle_counts_m3(const AdjacencyMatrix& a, std::size_t i, const NodeMask& s);

/// Any odd m >= 3 by enumeration of the first m-3 cycle nodes; the last two
/// are counted in aggregate with bitset intersections.
CycleCounts cycle_counts(const AdjacencyMatrix& a, std::size_t i, const NodeMask& s, int m);

/// Probability-weighted sums by explicit enumeration. m = 3 runs in
/// O(|S|^2); larger m is O(|S|^(m-1)) and meant for small instances.
CycleCounts cycle_counts(const DenseSymMatrix& probs, std::size_t i, std::span<const std::size_t> s, int m);

/// sum A_ij / sum theta_r(i) theta_c(j) (1 - A_ij) over all cells of a
/// rectangular 0/1 (or probability) matrix.
double estimate_x0(const Eigen::MatrixXd& a, const Eigen::VectorXd& row_theta, const Eigen::VectorXd& col_theta);
/// Same over all ordered pairs i != j of a network.
double estimate_x0(const AdjacencyMatrix& a, const Eigen::VectorXd& theta);

struct ThetaEstimate {
  Eigen::VectorXd theta;
  /// Nodes whose denominator was zero and that received the fallback value.
  std::vector<std::size_t> imputed;
};

/// theta_i = sqrt(phi1 / phi2) with S = (community of i) \ {i}, m = 3.
/// When phi2 = 0 the node gets `fallback`, or by default the mean of the
/// successfully estimated values in its community (0 if there are none).
/// Throws EstimationError if a community has fewer than 3 members.
ThetaEstimate estimate_theta(const AdjacencyMatrix& a, const Partition& part,
                             std::optional<double> fallback = std::nullopt);

/// Odd m >= 3; communities need at least m members. m = 3 gives exactly the
/// result of estimate_theta.
ThetaEstimate estimate_theta_general_m(const AdjacencyMatrix& a, const Partition& part, int m,
                                       std::optional<double> fallback = std::nullopt);

ThetaEstimate estimate_theta(const DenseSymMatrix& probs, const Partition& part, int m = 3,
                             std::optional<double> fallback = std::nullopt);

/// Off-diagonal entries: sum_{C_k x C_l} A_ij / sum theta_i theta_j (1 - A_ij).
/// Symmetrized, diagonal fixed to 1. A zero denominator gives 0 (logged).
Eigen::MatrixXd estimate_P(const AdjacencyMatrix& a, const Partition& part, const Eigen::VectorXd& theta_hat);
Eigen::MatrixXd estimate_P(const DenseSymMatrix& probs, const Partition& part, const Eigen::VectorXd& theta_hat);

/// The same block ratio applied to every (k, l) including k = l (pairs with
/// i = j excluded). Diagnostic only; NaN where the denominator is zero.
Eigen::MatrixXd block_ratios(const AdjacencyMatrix& a, const Partition& part, const Eigen::VectorXd& theta_hat);

/// N_ij = 1 / (1 + theta_i theta_j P[k, l]) for i in C_k, j in C_l. Negative
/// entries of P are treated as 0.
DenseSymMatrix assemble_N(const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& P_hat, const Partition& part);

/// Output of one refitting pass.
struct FitBundle {
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd P_hat;
  Partition partition;
  std::vector<std::size_t> imputed;

  /// Entry of the fitted nonlinear factor.
  double n_hat(std::size_t i, std::size_t j) const {
    const double p = std::max(0.0, P_hat(partition[i], partition[j]));
    return 1.0 / (1.0 + theta_hat(static_cast<Eigen::Index>(i)) * theta_hat(static_cast<Eigen::Index>(j)) * p);
  }
  DenseSymMatrix N_hat() const { return assemble_N(theta_hat, P_hat, partition); }
};

struct RefitOptions {
  int cycle_order = 3;
  std::optional<double> theta_fallback;
};

/// theta_hat from cycle ratios, P_hat from block ratios, both on `part`.
FitBundle refit(const AdjacencyMatrix& a, const Partition& part, const RefitOptions& opts = {});

/// theta_hat.csv, P_hat.csv and partition.txt inside `dir`.
void save_fit(const std::filesystem::path& dir, const FitBundle& fit);
FitBundle load_fit(const std::filesystem::path& dir);

}  // namespace rscore
