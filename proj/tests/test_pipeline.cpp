#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "rscore/errors.hpp"
#include "rscore/model.hpp"
#include "rscore/pipeline.hpp"
#include "support.hpp"

using namespace rscore;

namespace {

Partition random_partition(Rng& rng, std::size_t n, int k) {
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  return Partition(std::move(labels), k);
}

Partition relabel(const Partition& p, const std::vector<int>& perm) {
  std::vector<int> labels(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) labels[i] = perm[static_cast<std::size_t>(p[i])];
  return Partition(std::move(labels), p.num_communities());
}

// Setting (A) shrunk to n = 600 with the same b_n (and hence the same SNR).
ModelParams setting_a_small(Rng& rng) {
  ModelParams p;
  const std::vector<std::size_t> sizes(3, 200);
  p.pi = gen_partition(600, sizes);
  p.theta = gen_theta(ThetaSpec::uniform(0.01, 2.0, 60.0), 600, rng);
  p.P = uniform_offdiag_mixing(3, 23.0 / 30.0);
  return p;
}

ModelParams planted(Rng& rng, std::size_t n, int k, double b_n, double beta) {
  ModelParams p;
  const std::vector<std::size_t> sizes(static_cast<std::size_t>(k), n / static_cast<std::size_t>(k));
  p.pi = gen_partition(n, sizes);
  p.theta = gen_theta(ThetaSpec::uniform(0.2, 1.0, b_n), n, rng);
  p.P = uniform_offdiag_mixing(k, beta);
  return p;
}

}  // namespace

TEST_CASE("hamming error basic cases") {
  const Partition t({0, 0, 0, 1, 1, 1, 2, 2, 2, 2}, 3);
  CHECK(hamming_error(t, t) == 0.0);
  CHECK(hamming_error(relabel(t, {2, 0, 1}), t) == 0.0);
  std::vector<int> flip(t.labels().begin(), t.labels().end());
  flip[4] = 2;
  CHECK(hamming_error(Partition(flip, 3), t) == doctest::Approx(0.1));
  CHECK_THROWS_AS(hamming_error(t, Partition({0, 1}, 2)), ConfigError);
  CHECK_THROWS_AS(hamming_error_exhaustive(Partition(std::vector<int>(10, 0), 9), Partition(std::vector<int>(10, 0), 9)),
                  ConfigError);
}

TEST_CASE("hamming error symmetry, permutation invariance and agreement") {
  Rng rng(77);
  for (int rep = 0; rep < 1000; ++rep) {
    const int k = 2 + static_cast<int>(rng.below(4));
    const std::size_t n = 5 + rng.below(60);
    const auto a = random_partition(rng, n, k);
    const auto b = random_partition(rng, n, k);
    const double ex = hamming_error_exhaustive(a, b);
    REQUIRE(hamming_error_assignment(a, b) == ex);
    REQUIRE(hamming_error(a, b) == ex);
    REQUIRE(hamming_error(b, a) == ex);
    REQUIRE(ex >= 0.0);
    REQUIRE(ex <= 1.0);
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    REQUIRE(hamming_error(relabel(a, perm), b) == ex);
    REQUIRE(hamming_error(a, relabel(b, perm)) == ex);
  }
}

TEST_CASE("assignment solver matches brute force") {
  Rng rng(91);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 1 + static_cast<int>(rng.below(7));
    Eigen::MatrixXd c(k, k);
    for (int x = 0; x < k; ++x) {
      for (int y = 0; y < k; ++y) c(x, y) = std::floor(rng.uniform(-5.0, 5.0));
    }
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double s = 0.0;
      for (int x = 0; x < k; ++x) s += c(x, perm[static_cast<std::size_t>(x)]);
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto got = solve_assignment(c);
    std::vector<int> seen(got);
    std::sort(seen.begin(), seen.end());
    for (int x = 0; x < k; ++x) REQUIRE(seen[static_cast<std::size_t>(x)] == x);
    double s = 0.0;
    for (int x = 0; x < k; ++x) s += c(x, got[static_cast<std::size_t>(x)]);
    REQUIRE(s == best);
  }
}

TEST_CASE("hamming error with many communities") {
  Rng rng(3);
  const auto a = random_partition(rng, 200, 12);
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<int>(perm));
  CHECK(hamming_error(relabel(a, perm), a) == 0.0);
  std::vector<int> moved(a.labels().begin(), a.labels().end());
  for (std::size_t i = 0; i < 7; ++i) moved[i] = (moved[i] + 1) % 12;
  CHECK(hamming_error(relabel(Partition(moved, 12), perm), a) == doctest::Approx(7.0 / 200.0));
}

TEST_CASE("r_score with zero iterations is SCORE") {
  Rng rng(11);
  const auto p = planted(rng, 300, 3, 25.0, 0.5);
  const auto a = sample_adjacency(logit_link(build_tilde_omega(p)).omega, rng);
  RScoreConfig cfg;
  cfg.k = 3;
  cfg.iterations = 0;
  cfg.seed = 99;
  const auto r = r_score(a, cfg, &p.pi);
  Rng g = round_rng(99, nullptr);
  const auto s = score_adjacency(a, 3, g, cfg.score);
  CHECK(r.partition == s.partition);
  REQUIRE(r.trace.records.size() == 1);
  CHECK(r.trace.records[0].lambda1 == s.pairs.values(0));
  CHECK(!r.trace.records[0].fit);
  CHECK(*r.trace.records[0].hamming == hamming_error(s.partition, p.pi));
}

TEST_CASE("r_score preconditions") {
  Rng rng(12);
  const auto a = test::random_graph(rng, 8, 0.5);
  RScoreConfig cfg;
  cfg.k = 1;
  CHECK_THROWS_AS(r_score(a, cfg), ConfigError);
  cfg.k = 3;
  CHECK_THROWS_AS(r_score(a, cfg), ConfigError);
  cfg.k = 2;
  cfg.iterations = -1;
  CHECK_THROWS_AS(r_score(a, cfg), ConfigError);
  cfg.iterations = 1;
  const Partition wrong({0, 1}, 2);
  CHECK_THROWS_AS(r_score(a, cfg, &wrong), ConfigError);
}

TEST_CASE("r_score trace and fixed point") {
  Rng rng(13);
  const auto p = planted(rng, 400, 4, 30.0, 0.4);
  const auto a = sample_adjacency(logit_link(build_tilde_omega(p)).omega, rng);
  RScoreConfig cfg;
  cfg.k = 4;
  cfg.iterations = 10;
  cfg.seed = 5;
  const auto r = r_score(a, cfg, &p.pi);
  const auto& recs = r.trace.records;
  REQUIRE(recs.size() >= 2);
  CHECK(recs.size() <= 11);
  for (std::size_t m = 0; m < recs.size(); ++m) {
    CHECK(recs[m].iteration == static_cast<int>(m));
    CHECK(recs[m].fit.has_value() == (m > 0));
  }
  CHECK(r.partition == recs.back().partition);

  if (recs.size() < 11) {
    // stopped on a repeat: the last two partitions coincide and further
    // rounds of the same map reproduce them
    CHECK(recs[recs.size() - 1].partition == recs[recs.size() - 2].partition);
    CHECK(r.trace.stop_reason.find("fixed point") != std::string::npos);
    RScoreConfig more = cfg;
    more.early_stop = false;
    more.iterations = static_cast<int>(recs.size()) + 1;
    const auto r2 = r_score(a, more, &p.pi);
    REQUIRE(r2.trace.records.size() == recs.size() + 2);
    for (std::size_t m = 0; m < recs.size(); ++m) CHECK(r2.trace.records[m].partition == recs[m].partition);
    CHECK(r2.trace.records[recs.size()].partition == r.partition);
    CHECK(r2.trace.records[recs.size() + 1].partition == r.partition);
  }

  const auto again = r_score(a, cfg, &p.pi);
  CHECK(again.partition == r.partition);
  CHECK(again.trace.records.size() == recs.size());

  std::ostringstream csv;
  write_trace_csv(csv, r.trace);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "iteration,hamming_error,lambda1,lambdaK,theta_hat_mean,P_offdiag_mean");
  std::getline(lines, line);
  CHECK(std::count(line.begin(), line.end(), ',') == 5);
  CHECK(line.substr(line.size() - 2) == ",,");
  std::size_t rows = 1;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
    CHECK(line.back() != ',');
  }
  CHECK(rows == recs.size());
}

TEST_CASE("failed refit keeps the last partition") {
  // K = 2 on a graph whose SCORE split leaves a community with < 3 nodes
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = i + 1; j < 10; ++j) edges.push_back({i, j});
  }
  edges.push_back({10, 0});
  edges.push_back({11, 10});
  const auto a = AdjacencyMatrix::from_edges(12, edges);
  RScoreConfig cfg;
  cfg.k = 2;
  cfg.iterations = 3;
  const auto r = r_score(a, cfg);
  const auto sizes = r.trace.records[0].partition.community_sizes();
  if (std::min(sizes[0], sizes[1]) < 3) {
    CHECK(r.trace.records.size() == 1);
    CHECK(r.trace.stop_reason.find("refit failed") != std::string::npos);
    CHECK(r.partition == r.trace.records[0].partition);
  } else {
    MESSAGE("initial SCORE split was balanced; refit failure path not exercised");
  }
}

TEST_CASE("oracle renormalization beats SCORE") {
  double err_score = 0.0, err_oracle = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const auto p = setting_a_small(rng);
    const auto lm = logit_link(build_tilde_omega(p));
    const auto a = sample_adjacency(lm.omega, rng);
    Rng g0 = rng.split("score");
    Rng g1 = rng.split("oracle");
    err_score += hamming_error(score_adjacency(a, 3, g0, {}).partition, p.pi);
    err_oracle += hamming_error(
        score_renormalized(a, [&](std::size_t i, std::size_t j) { return lm.nfactor(i, j); }, 3, g1, {}).partition, p.pi);
  }
  MESSAGE("mean error SCORE " << err_score / 20 << ", oracle " << err_oracle / 20);
  CHECK(err_oracle < err_score);
}

TEST_CASE("rate curves") {
  auto check = [](double beta, double a0, double a1) {
    const auto [x0, x1] = rate_curves(beta);
    CHECK(x0 == doctest::Approx(a0).epsilon(1e-15));
    CHECK(x1 == doctest::Approx(a1).epsilon(1e-15));
  };
  check(0.1, 0.4, 0.6);
  check(1.0 / 8.0, 0.5, 0.75);
  check(1.0 / 6.0, 2.0 / 3.0, 2.0 / 3.0);
  check(0.25, 0.5, 0.5);
  check(0.4, 0.2, 0.2);
  const auto [s0, s1] = rate_curves(1.0 / 6.0);
  CHECK(s0 == s1);
  for (double bad : {0.0, 0.5, -0.1, 0.7, std::nan("")}) CHECK_THROWS_AS(rate_curves(bad), DomainError);
  for (int i = 1; i < 1000; ++i) {
    const double beta = 0.5 * i / 1000.0;
    const auto [a0, a1] = rate_curves(beta);
    REQUIRE(a1 >= a0);
    REQUIRE((a1 == a0) == (beta >= 1.0 / 6.0));
  }
}

TEST_CASE("condition report") {
  ModelParams eq;
  const std::vector<std::size_t> sizes(4, 50);
  eq.pi = gen_partition(200, sizes);
  eq.theta = Eigen::VectorXd::Constant(200, 0.3);
  eq.P = uniform_offdiag_mixing(4, 0.3);
  const auto r = check_conditions(eq);
  CHECK(r.balance_ratio == doctest::Approx(0.25));
  CHECK(r.theta_spread == doctest::Approx(1.0));
  CHECK(r.eta_positive);
  CHECK(r.eta_ratio == doctest::Approx(1.0));
  CHECK(r.violations.empty());
  CHECK(r.lambda_min_P == doctest::Approx(0.7));
  CHECK(r.calibrated_snr == doctest::Approx(0.3 * std::sqrt(200.0) * 0.7));
  CHECK(r.signal_strength == doctest::Approx(std::sqrt(200.0) * 0.3 * 0.7 / std::log(200.0)));

  Rng rng(21);
  const auto a = setting_a_small(rng);
  ModelParams full = a;
  const std::vector<std::size_t> big(3, 800);
  full.pi = gen_partition(2400, big);
  full.theta = gen_theta(ThetaSpec::uniform(0.01, 2.0, 60.0), 2400, rng);
  const auto ra = check_conditions(full);
  CHECK(ra.calibrated_snr == doctest::Approx(14.0).epsilon(1e-9));
  CHECK(ra.snr > 0.0);
  CHECK(ra.nonlinearity_ratio > 0.0);

  ModelParams ones = eq;
  ones.P = Eigen::MatrixXd::Ones(4, 4);
  const auto ro = check_conditions(ones);
  CHECK(ro.lambda_min_P == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(!ro.violations.empty());
  const auto text = format_report(ro);
  CHECK(text.find("P is singular") != std::string::npos);
}
