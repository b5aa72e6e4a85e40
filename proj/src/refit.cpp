#include "rscore/refit.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rscore/errors.hpp"
#include "rscore/io.hpp"

namespace rscore {
namespace {

void check_sizes(const Partition& part, std::size_t n, int m) {
  if (part.size() != n) throw ConfigError(fmt::format("partition has {} labels for {} nodes", part.size(), n));
  const auto sizes = part.community_sizes();
  const auto need = static_cast<std::size_t>(std::max(3, m));
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < need) {
      throw EstimationError(fmt::format("community {} has {} member(s); cycle ratios of order {} need at least {}",
                                        k + 1, sizes[k], m, need),
                            static_cast<double>(sizes[k]), static_cast<double>(need));
    }
  }
}

// sqrt(phi1 / phi2) per node, with the fallback rule for empty denominators.
ThetaEstimate finish_theta(const std::vector<CycleCounts>& counts, const Partition& part,
                           std::optional<double> fallback) {
  const auto n = static_cast<Eigen::Index>(counts.size());
  ThetaEstimate est;
  est.theta = Eigen::VectorXd::Zero(n);
  const int k = part.num_communities();
  std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
  std::vector<std::size_t> ok(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = counts[static_cast<std::size_t>(i)];
    if (c.phi2 > 0.0) {
      est.theta(i) = std::sqrt(c.phi1 / c.phi2);
      const auto l = static_cast<std::size_t>(part[static_cast<std::size_t>(i)]);
      sum[l] += est.theta(i);
      ++ok[l];
    } else {
      est.imputed.push_back(static_cast<std::size_t>(i));
    }
  }
  for (const auto i : est.imputed) {
    const auto l = static_cast<std::size_t>(part[i]);
    est.theta(static_cast<Eigen::Index>(i)) = fallback ? *fallback : (ok[l] > 0 ? sum[l] / static_cast<double>(ok[l]) : 0.0);
  }
  if (!est.imputed.empty()) {
    spdlog::warn("theta refit: {} node(s) with an empty cycle denominator received the fallback value",
                 est.imputed.size());
  }
  return est;
}

template <class Entry>
Eigen::MatrixXd block_sums(const Partition& part, const Eigen::VectorXd& theta, Entry&& entry, bool diagonal,
                           Eigen::MatrixXd& den) {
  const int k = part.num_communities();
  const std::size_t n = part.size();
  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(k, k);
  den = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const int a = part[i];
      const int b = part[j];
      if (a == b && !diagonal) continue;
      const double v = entry(i, j);
      num(a, b) += v;
      den(a, b) += theta(static_cast<Eigen::Index>(i)) * theta(static_cast<Eigen::Index>(j)) * (1.0 - v);
    }
  }
  return num;
}

Eigen::MatrixXd finish_P(const Eigen::MatrixXd& num, const Eigen::MatrixXd& den) {
  const auto k = num.rows();
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      // Both orientations carry the same sums; averaging them symmetrizes.
      const double nsum = 0.5 * (num(a, b) + num(b, a));
      const double dsum = 0.5 * (den(a, b) + den(b, a));
      double v = 0.0;
      if (dsum > 0.0) {
        v = nsum / dsum;
      } else {
        spdlog::warn("P refit: zero denominator for communities ({}, {}); entry set to 0", a + 1, b + 1);
      }
      p(a, b) = v;
      p(b, a) = v;
    }
  }
  return p;
}

// Adjacency block sums in O(n + |E|).
void adjacency_block_sums(const AdjacencyMatrix& a, const Partition& part, const Eigen::VectorXd& theta,
                          Eigen::MatrixXd& num, Eigen::MatrixXd& den) {
  const int k = part.num_communities();
  const std::size_t n = a.size();
  Eigen::VectorXd tsum = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd tsq = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = theta(static_cast<Eigen::Index>(i));
    tsum(part[i]) += t;
    tsq(part[i]) += t * t;
  }
  num = Eigen::MatrixXd::Zero(k, k);
  den = tsum * tsum.transpose();
  den.diagonal() -= tsq;  // i != j
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto j : a.neighbors(i)) {
      num(part[i], part[j]) += 1.0;
      den(part[i], part[j]) -= theta(static_cast<Eigen::Index>(i)) * theta(static_cast<Eigen::Index>(j));
    }
  }
}

void check_theta(const Partition& part, const Eigen::VectorXd& theta, std::size_t n) {
  if (part.size() != n || static_cast<std::size_t>(theta.size()) != n) {
    throw ConfigError(fmt::format("partition ({}) and theta ({}) must both have {} entries", part.size(),
                                  theta.size(), n));
  }
  if (!part.all_nonempty()) throw ConfigError("every community must be non-empty to estimate P");
}

}  // namespace

double estimate_x0(const Eigen::MatrixXd& a, const Eigen::VectorXd& row_theta, const Eigen::VectorXd& col_theta) {
  if (a.rows() != row_theta.size() || a.cols() != col_theta.size()) {
    throw ConfigError(fmt::format("matrix is {}x{} but theta vectors have {} and {} entries", a.rows(), a.cols(),
                                  row_theta.size(), col_theta.size()));
  }
  const double num = a.sum();
  const double den = (row_theta.asDiagonal() * (Eigen::MatrixXd::Ones(a.rows(), a.cols()) - a) * col_theta.asDiagonal()).sum();
  if (!(den > 0.0)) throw EstimationError("x0 estimate has a zero denominator", num, den);
  return num / den;
}

double estimate_x0(const AdjacencyMatrix& a, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != a.size()) {
    throw ConfigError(fmt::format("theta has {} entries for {} nodes", theta.size(), a.size()));
  }
  const double num = 2.0 * static_cast<double>(a.edge_count());
  double den = theta.sum() * theta.sum() - theta.squaredNorm();
  for (const auto& [i, j] : a.edges()) den -= 2.0 * theta(static_cast<Eigen::Index>(i)) * theta(static_cast<Eigen::Index>(j));
  if (!(den > 0.0)) throw EstimationError("x0 estimate has a zero denominator", num, den);
  return num / den;
}

ThetaEstimate estimate_theta(const AdjacencyMatrix& a, const Partition& part, std::optional<double> fallback) {
  check_sizes(part, a.size(), 3);
  const std::size_t n = a.size();
  const std::size_t words = a.words_per_row();
  std::vector<CycleCounts> counts(n);
  std::vector<std::size_t> deg_c(n, 0);
  std::vector<std::uint64_t> nbr(words);

  for (const auto& members : part.members()) {
    const NodeMask c(n, members);
    const auto cw = c.words();
    std::size_t twice_edges = 0;
    for (const auto j : members) {
      deg_c[j] = popcount_and(a.row(j), cw);
      twice_edges += deg_c[j];
    }
    // With S = C \ {i}: 2 e(S) - 2 sum_{j in N} deg_S(j) = 2 e(C) - 2 sum_{j in N} deg_C(j).
    for (const auto i : members) {
      const auto row_i = a.row(i);
      for (std::size_t w = 0; w < words; ++w) nbr[w] = row_i[w] & cw[w];
      std::size_t t = 0;
      std::size_t nbr_deg = 0;
      for_each_bit(std::span<const std::uint64_t>(nbr), [&](std::size_t j) {
        t += popcount_and(a.row(j), nbr);
        nbr_deg += deg_c[j];
      });
      const double d = static_cast<double>(deg_c[i]);
      counts[i] = CycleCounts{
          d * (d - 1.0) - static_cast<double>(t),
          static_cast<double>(twice_edges) - 2.0 * static_cast<double>(nbr_deg) + static_cast<double>(t),
      };
    }
  }
  return finish_theta(counts, part, fallback);
}

ThetaEstimate estimate_theta_general_m(const AdjacencyMatrix& a, const Partition& part, int m,
                                       std::optional<double> fallback) {
  if (m < 3 || m % 2 == 0) throw ConfigError(fmt::format("cycle order must be odd and >= 3, got {}", m));
  check_sizes(part, a.size(), m);
  const std::size_t n = a.size();
  std::vector<CycleCounts> counts(n);
  for (const auto& members : part.members()) {
    NodeMask s(n, members);
    for (const auto i : members) {
      s.reset(i);
      counts[i] = cycle_counts(a, i, s, m);
      s.set(i);
    }
  }
  return finish_theta(counts, part, fallback);
}

ThetaEstimate estimate_theta(const DenseSymMatrix& probs, const Partition& part, int m,
                             std::optional<double> fallback) {
  check_sizes(part, probs.dim(), m);
  std::vector<CycleCounts> counts(probs.dim());
  std::vector<std::size_t> s;
  for (const auto& members : part.members()) {
    for (const auto i : members) {
      s.clear();
      for (const auto j : members) {
        if (j != i) s.push_back(j);
      }
      counts[i] = cycle_counts(probs, i, s, m);
    }
  }
  return finish_theta(counts, part, fallback);
}

Eigen::MatrixXd estimate_P(const AdjacencyMatrix& a, const Partition& part, const Eigen::VectorXd& theta_hat) {
  check_theta(part, theta_hat, a.size());
  Eigen::MatrixXd num;
  Eigen::MatrixXd den;
  adjacency_block_sums(a, part, theta_hat, num, den);
  return finish_P(num, den);
}

Eigen::MatrixXd estimate_P(const DenseSymMatrix& probs, const Partition& part, const Eigen::VectorXd& theta_hat) {
  check_theta(part, theta_hat, probs.dim());
  Eigen::MatrixXd den;
  const Eigen::MatrixXd num =
      block_sums(part, theta_hat, [&](std::size_t i, std::size_t j) { return probs(i, j); }, false, den);
  return finish_P(num, den);
}

Eigen::MatrixXd block_ratios(const AdjacencyMatrix& a, const Partition& part, const Eigen::VectorXd& theta_hat) {
  check_theta(part, theta_hat, a.size());
  Eigen::MatrixXd num;
  Eigen::MatrixXd den;
  adjacency_block_sums(a, part, theta_hat, num, den);
  Eigen::MatrixXd r(num.rows(), num.cols());
  for (Eigen::Index x = 0; x < r.rows(); ++x) {
    for (Eigen::Index y = 0; y < r.cols(); ++y) {
      r(x, y) = den(x, y) > 0.0 ? num(x, y) / den(x, y) : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return r;
}

DenseSymMatrix assemble_N(const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& P_hat, const Partition& part) {
  const auto n = static_cast<std::size_t>(theta_hat.size());
  if (part.size() != n) throw ConfigError(fmt::format("partition has {} labels for {} nodes", part.size(), n));
  if (P_hat.rows() != part.num_communities() || P_hat.cols() != part.num_communities()) {
    throw ConfigError("P_hat does not match the number of communities");
  }
  if (theta_hat.size() > 0 && theta_hat.minCoeff() < 0.0) throw DomainError("theta_hat must be non-negative");
  if (P_hat.minCoeff() < 0.0) spdlog::warn("N assembly: negative P_hat entries clamped to 0");
  const Eigen::MatrixXd p = P_hat.cwiseMax(0.0);
  return DenseSymMatrix::from_upper(n, [&](std::size_t i, std::size_t j) {
    return 1.0 / (1.0 + theta_hat(static_cast<Eigen::Index>(i)) * theta_hat(static_cast<Eigen::Index>(j)) * p(part[i], part[j]));
  });
}

FitBundle refit(const AdjacencyMatrix& a, const Partition& part, const RefitOptions& opts) {
  ThetaEstimate th = opts.cycle_order == 3 ? estimate_theta(a, part, opts.theta_fallback)
                                           : estimate_theta_general_m(a, part, opts.cycle_order, opts.theta_fallback);
  Eigen::MatrixXd p = estimate_P(a, part, th.theta);
  return FitBundle{std::move(th.theta), std::move(p), part, std::move(th.imputed)};
}

void save_fit(const std::filesystem::path& dir, const FitBundle& fit) {
  io::write_csv(dir / "theta_hat.csv", Eigen::MatrixXd(fit.theta_hat));
  io::write_csv(dir / "P_hat.csv", fit.P_hat);
  io::write_partition(dir / "partition.txt", fit.partition);
}

FitBundle load_fit(const std::filesystem::path& dir) {
  const Eigen::MatrixXd theta = io::read_csv(dir / "theta_hat.csv");
  const Eigen::MatrixXd p = io::read_csv(dir / "P_hat.csv");
  if (theta.cols() != 1) throw IoError("theta_hat.csv must have a single column");
  if (p.rows() != p.cols()) throw IoError("P_hat.csv must be square");
  Partition part = io::read_partition(dir / "partition.txt", static_cast<int>(p.rows()));
  if (part.size() != static_cast<std::size_t>(theta.rows())) {
    throw IoError("partition.txt and theta_hat.csv disagree on the node count");
  }
  return FitBundle{theta.col(0), p, std::move(part), {}};
}

}  // namespace rscore
