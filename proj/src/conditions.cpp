#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "rscore/pipeline.hpp"

namespace rscore {

ConditionReport check_conditions(const ModelParams& params) {
  params.validate();
  ConditionReport r;
  const std::size_t n = params.n();
  const int k = params.k();
  const double dn = static_cast<double>(n);
  const Eigen::VectorXd& theta = params.theta;

  const auto sizes = params.pi.community_sizes();
  r.balance_ratio = static_cast<double>(*std::min_element(sizes.begin(), sizes.end())) / dn;

  const double mean = theta.mean();
  r.theta_spread = theta.maxCoeff() / theta.minCoeff();
  r.theta_max_over_mean = theta.maxCoeff() / mean;
  r.theta_min_over_mean = theta.minCoeff() / mean;

  r.lambda_min_P = min_abs_eigenvalue(params.P);
  r.signal_strength = std::sqrt(dn) * mean * r.lambda_min_P / std::log(dn);
  r.calibrated_snr = theta.norm() * r.lambda_min_P;

  // The nonzero spectrum of tilde-Omega is that of D^{1/2} P D^{1/2} with
  // D = Pi' Theta^2 Pi; P D shares it, with right eigenvectors D^{-1/2} u.
  Eigen::VectorXd d = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < n; ++i) d(params.pi[i]) += theta(static_cast<Eigen::Index>(i)) * theta(static_cast<Eigen::Index>(i));
  const Eigen::VectorXd sd = d.cwiseSqrt();
  const Eigen::MatrixXd s = sd.asDiagonal() * params.P * sd.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  std::vector<int> order(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
  });
  const double l1 = es.eigenvalues()(order.front());
  const double lk = es.eigenvalues()(order.back());
  const double l2 = k > 1 ? std::abs(es.eigenvalues()(order[1])) : 0.0;
  r.eigen_gap_ratio = (l1 - l2) / l1;
  r.snr = std::abs(lk) / std::sqrt(std::abs(l1));

  Eigen::VectorXd eta = es.eigenvectors().col(order.front()).cwiseQuotient(sd);
  if (eta.sum() < 0) eta = -eta;
  r.eta_positive = eta.minCoeff() > 0.0;
  r.eta_ratio = r.eta_positive ? eta.maxCoeff() / eta.minCoeff() : std::numeric_limits<double>::infinity();

  // (N - 11') o tilde = -tilde^2 / (1 + tilde)
  const Eigen::VectorXd th = theta;
  const Eigen::MatrixXd& p = params.P;
  const auto& pi = params.pi;
  const auto resid = DenseSymMatrix::from_upper(n, [&](std::size_t i, std::size_t j) {
    const double t = th(static_cast<Eigen::Index>(i)) * th(static_cast<Eigen::Index>(j)) * p(pi[i], pi[j]);
    return -t * t / (1.0 + t);
  });
  r.nonlinearity_ratio = resid.spectral_norm() / std::abs(lk);

  if (r.lambda_min_P <= 1e-12) r.violations.emplace_back("P is singular: lambda_min(P) = 0, the signal condition fails");
  if (!r.eta_positive) r.violations.emplace_back("leading eigenvector of P Pi' Theta^2 Pi is not strictly positive");
  if (!(r.eigen_gap_ratio > 0.0)) r.violations.emplace_back("no eigen-gap: lambda_1 <= |lambda_2|");
  return r;
}

std::string format_report(const ConditionReport& r) {
  std::ostringstream out;
  const auto line = [&](const char* key, double v) { out << fmt::format("{:<22} {:.6g}\n", key, v); };
  line("balance_ratio", r.balance_ratio);
  line("theta_spread", r.theta_spread);
  line("theta_max_over_mean", r.theta_max_over_mean);
  line("theta_min_over_mean", r.theta_min_over_mean);
  line("lambda_min_P", r.lambda_min_P);
  line("signal_strength", r.signal_strength);
  line("calibrated_snr", r.calibrated_snr);
  line("eigen_gap_ratio", r.eigen_gap_ratio);
  line("eta_ratio", r.eta_ratio);
  out << fmt::format("{:<22} {}\n", "eta_positive", r.eta_positive ? "yes" : "no");
  line("snr", r.snr);
  line("nonlinearity_ratio", r.nonlinearity_ratio);
  for (const auto& v : r.violations) out << "violation: " << v << '\n';
  return out.str();
}

}  // namespace rscore
