#include <doctest.h>

#include <algorithm>
#include <array>
#include <filesystem>

#include "rscore/errors.hpp"
#include "rscore/model.hpp"
#include "rscore/refit.hpp"
#include "support.hpp"

using namespace rscore;

namespace {

NodeMask mask_of(std::size_t n, const std::vector<std::size_t>& s) {
  NodeMask m(n);
  for (const auto j : s) m.set(j);
  return m;
}

// Row of S = community of i minus i.
std::vector<std::size_t> others(const Partition& part, std::size_t i) {
  std::vector<std::size_t> s;
  for (std::size_t j = 0; j < part.size(); ++j) {
    if (j != i && part[j] == part[i]) s.push_back(j);
  }
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

}  // namespace

TEST_CASE("m = 3 cycle counts on hand-checked graphs") {
  const std::vector<Edge> tri{{0, 1}, {1, 2}, {0, 2}};
  const auto k3 = AdjacencyMatrix::from_edges(3, tri);
  const auto c = cycle_counts_m3(k3, 0, mask_of(3, {1, 2}));
  CHECK(c.phi1 == 0.0);
  CHECK(c.phi2 == 0.0);

  const std::vector<Edge> path{{0, 1}, {0, 2}};
  const auto p = AdjacencyMatrix::from_edges(3, path);
  const auto d = cycle_counts_m3(p, 0, mask_of(3, {1, 2}));
  CHECK(d.phi1 == 2.0);
  CHECK(d.phi2 == 0.0);

  CHECK_THROWS_AS(cycle_counts_m3(p, 0, mask_of(3, {0, 1})), ConfigError);
  CHECK_THROWS_AS(cycle_counts(p, 0, mask_of(3, {1, 2}), 4), ConfigError);
}

TEST_CASE("cycle counts match brute force") {
  Rng rng(123);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 3 + rng.below(28);
    const auto a = test::random_graph(rng, n, rng.uniform(0.05, 0.95));
    const auto dense = a.to_dense();
    const std::size_t i = rng.below(n);
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && rng.uniform() < 0.7) s.push_back(j);
    }
    const auto [b1, b2] = test::brute_cycles(dense, i, s, 3);
    const auto mask = mask_of(n, s);
    const auto c = cycle_counts_m3(a, i, mask);
    REQUIRE(c.phi1 == b1);
    REQUIRE(c.phi2 == b2);
    const auto g = cycle_counts(a, i, mask, 3);
    REQUIRE(g.phi1 == b1);
    REQUIRE(g.phi2 == b2);

    if (s.size() <= 9) {
      for (int m : {5, 7}) {
        const auto [e1, e2] = test::brute_cycles(dense, i, s, m);
        const auto h = cycle_counts(a, i, mask, m);
        REQUIRE(h.phi1 == e1);
        REQUIRE(h.phi2 == e2);
      }
    }
  }
}

TEST_CASE("weighted cycle counts match brute force") {
  Rng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 8;
    Eigen::MatrixXd w(n, n);
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y <= x; ++y) {
        w(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = w(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = rng.uniform();
      }
    }
    const std::vector<std::size_t> s{1, 2, 4, 5, 7};
    for (int m : {3, 5}) {
      const auto [b1, b2] = test::brute_cycles(w, 0, s, m);
      const auto c = cycle_counts(DenseSymMatrix(w), 0, s, m);
      CHECK(c.phi1 == doctest::Approx(b1).epsilon(1e-12));
      CHECK(c.phi2 == doctest::Approx(b2).epsilon(1e-12));
    }
  }
}

TEST_CASE("population exactness of the cancellation estimators") {
  Rng rng(2024);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = std::array{2, 3, 5}[rep % 3];
    const std::size_t n = 30 + rng.below(60);
    const auto p = test::random_params(rng, n, k, 0.1, 1.5, 0.9, 5);
    const auto omega = logit_link(build_tilde_omega(p)).omega;

    const auto t3 = estimate_theta(omega, p.pi, 3);
    CHECK(t3.imputed.empty());
    CHECK((t3.theta - p.theta).cwiseAbs().maxCoeff() <= 1e-10);

    const auto ph = estimate_P(omega, p.pi, p.theta);
    CHECK((ph - p.P).cwiseAbs().maxCoeff() <= 1e-10);
  }
  // m = 5 by explicit enumeration on a small instance
  const auto p = test::random_params(rng, 16, 2, 0.2, 1.2, 0.7, 6);
  const auto omega = logit_link(build_tilde_omega(p)).omega;
  const auto t5 = estimate_theta(omega, p.pi, 5);
  CHECK((t5.theta - p.theta).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("estimate_x0") {
  Rng rng(6);
  const Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(30, 0.5, 1.0);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(20, 0.2, 1.3);
  Eigen::MatrixXd omega(30, 20);
  for (Eigen::Index i = 0; i < 30; ++i) {
    for (Eigen::Index j = 0; j < 20; ++j) {
      const double t = 2.0 * r(i) * c(j);
      omega(i, j) = t / (1.0 + t);
    }
  }
  CHECK(estimate_x0(omega, r, c) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(estimate_x0(Eigen::MatrixXd::Zero(30, 20), r, c) == 0.0);
  try {
    estimate_x0(Eigen::MatrixXd::Ones(3, 3), Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3));
    FAIL("expected EstimationError");
  } catch (const EstimationError& e) {
    CHECK(e.numerator() == 9.0);
    CHECK(e.denominator() == 0.0);
  }

  // Monte-Carlo: bipartite 400 x 400, x0 = 1.5
  std::vector<double> est;
  for (int seed = 0; seed < 100; ++seed) {
    Rng g(seed);
    Eigen::VectorXd tr(400), tc(400);
    for (Eigen::Index i = 0; i < 400; ++i) {
      tr(i) = g.uniform(0.5, 1.0);
      tc(i) = g.uniform(0.5, 1.0);
    }
    Eigen::MatrixXd a(400, 400);
    for (Eigen::Index i = 0; i < 400; ++i) {
      for (Eigen::Index j = 0; j < 400; ++j) {
        const double t = 1.5 * tr(i) * tc(j);
        a(i, j) = g.uniform() < t / (1.0 + t) ? 1.0 : 0.0;
      }
    }
    est.push_back(estimate_x0(a, tr, tc));
  }
  double mean = 0.0, ss = 0.0;
  for (double e : est) mean += e;
  mean /= static_cast<double>(est.size());
  for (double e : est) ss += (e - mean) * (e - mean);
  const double se = std::sqrt(ss / static_cast<double>(est.size() - 1) / static_cast<double>(est.size()));
  CHECK(std::abs(mean - 1.5) <= 2.0 * se);
}

TEST_CASE("mislabeled node ratio scales by P") {
  Rng rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const auto p = test::random_params(rng, 40, 3, 0.2, 1.5, 0.9, 8);
    const auto omega = logit_link(build_tilde_omega(p)).omega;
    const auto members = p.pi.members();
    for (std::size_t i = 0; i < 40; i += 7) {
      const int k0 = p.pi[i];
      const int k = (k0 + 1) % 3;
      for (int m : {3, 5}) {
        if (m == 5 && members[static_cast<std::size_t>(k)].size() > 10) continue;
        const auto c = cycle_counts(omega, i, members[static_cast<std::size_t>(k)], m);
        const double want = p.P(k, k0) * p.theta(static_cast<Eigen::Index>(i));
        CHECK(c.phi1 / c.phi2 == doctest::Approx(want * want).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("estimate_theta on sampled graphs") {
  Rng rng(10);
  const auto p = test::random_params(rng, 120, 2, 0.3, 1.2, 0.5, 40);
  const auto lm = logit_link(build_tilde_omega(p));
  const auto a = sample_adjacency(lm.omega, rng);

  const auto t3 = estimate_theta(a, p.pi);
  const auto g3 = estimate_theta_general_m(a, p.pi, 3);
  CHECK(t3.theta == g3.theta);
  for (Eigen::Index i = 0; i < 120; ++i) {
    const auto [b1, b2] = test::brute_cycles(a.to_dense(), static_cast<std::size_t>(i), others(p.pi, static_cast<std::size_t>(i)), 3);
    if (b2 > 0) CHECK(t3.theta(i) == std::sqrt(b1 / b2));
  }

  CHECK_THROWS_AS(estimate_theta_general_m(a, p.pi, 4), ConfigError);
  const Partition tiny({0, 0, 1, 1, 1, 1}, 2);
  const auto small = test::random_graph(rng, 6, 0.5);
  CHECK_THROWS_AS(estimate_theta(small, tiny), EstimationError);
}

TEST_CASE("empty cycle denominators take the community mean") {
  // star inside one community: the centre has phi2 = 0
  std::vector<Edge> edges;
  for (std::size_t j = 1; j < 6; ++j) edges.push_back({0, j});
  edges.push_back({1, 2});
  edges.push_back({3, 4});
  const auto a = AdjacencyMatrix::from_edges(6, edges);
  const Partition one({0, 0, 0, 0, 0, 0}, 1);
  const auto est = estimate_theta(a, one);
  REQUIRE(est.imputed == std::vector<std::size_t>{0});
  double mean = 0.0;
  for (Eigen::Index i = 1; i < 6; ++i) mean += est.theta(i);
  CHECK(est.theta(0) == doctest::Approx(mean / 5.0));
  CHECK(estimate_theta(a, one, 0.25).theta(0) == 0.25);
}

TEST_CASE("m = 5 and m = 3 have comparable accuracy") {
  std::vector<double> e3, e5;
  for (int seed = 0; seed < 3; ++seed) {
    Rng rng(300 + seed);
    ModelParams p;
    const std::vector<std::size_t> sizes{400};
    p.pi = gen_partition(400, sizes);
    p.theta = Eigen::VectorXd(400);
    for (Eigen::Index i = 0; i < 400; ++i) p.theta(i) = rng.uniform(0.1, 0.3);
    p.P = Eigen::MatrixXd::Ones(1, 1);
    const auto a = sample_adjacency(logit_link(build_tilde_omega(p)).omega, rng);
    const auto t3 = estimate_theta(a, p.pi);
    const auto t5 = estimate_theta_general_m(a, p.pi, 5);
    for (Eigen::Index i = 0; i < 400; i += 8) {
      e3.push_back(std::abs(t3.theta(i) / p.theta(i) - 1.0));
      e5.push_back(std::abs(t5.theta(i) / p.theta(i) - 1.0));
    }
  }
  const double m3 = median(e3), m5 = median(e5);
  MESSAGE("median relative error m=3: " << m3 << ", m=5: " << m5);
  CHECK(m5 < 2.0 * m3);
  CHECK(m3 < 2.0 * m5);
}

TEST_CASE("estimate_P") {
  Rng rng(12);
  const auto p = test::random_params(rng, 60, 2, 0.5, 1.0, 0.5, 20);
  auto dense = sample_adjacency(logit_link(build_tilde_omega(p)).omega, rng).to_dense();
  for (std::size_t i = 0; i < 60; ++i) {
    for (std::size_t j = 0; j < 60; ++j) {
      if (p.pi[i] != p.pi[j]) dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
    }
  }
  const auto ph = estimate_P(AdjacencyMatrix::from_dense(dense), p.pi, p.theta);
  CHECK(ph(0, 1) == 0.0);
  CHECK(ph(0, 0) == 1.0);

  // Setting (B)-like at n = 500 with the true partition
  std::vector<double> errs;
  const auto P = uniform_offdiag_mixing(5, 0.65);
  for (int seed = 0; seed < 50; ++seed) {
    Rng g(5000 + seed);
    ModelParams q;
    const std::vector<std::size_t> sizes(5, 100);
    q.pi = gen_partition(500, sizes);
    q.theta = gen_theta(ThetaSpec::uniform(0.1, 0.8, 70.0), 500, g);
    q.P = P;
    const auto a = sample_adjacency(logit_link(build_tilde_omega(q)).omega, g);
    const auto th = estimate_theta(a, q.pi);
    errs.push_back((estimate_P(a, q.pi, th.theta) - P).cwiseAbs().maxCoeff());
  }
  MESSAGE("median max|P_hat - P| = " << median(errs));
  CHECK(median(errs) < 0.1 * min_abs_eigenvalue(P));
}

TEST_CASE("assemble_N and FitBundle") {
  const Partition part({0, 1, 1}, 2);
  const Eigen::Matrix2d P{{1.0, 1.0}, {1.0, 1.0}};
  const auto zero = assemble_N(Eigen::VectorXd::Zero(3), P, part);
  CHECK(zero.matrix() == Eigen::MatrixXd::Ones(3, 3));
  const auto half = assemble_N(Eigen::VectorXd::Ones(3), P, part);
  CHECK(half(0, 1) == 0.5);

  Rng rng(14);
  const auto p = test::random_params(rng, 50, 3);
  const auto lm = logit_link(build_tilde_omega(p));
  const auto n = assemble_N(p.theta, p.P, p.pi);
  CHECK((n.matrix() - lm.nfactor.matrix()).cwiseAbs().maxCoeff() <= 1e-12);

  const auto a = sample_adjacency(lm.omega, rng);
  const auto fit = refit(a, p.pi);
  const auto fit2 = refit(a, p.pi);
  CHECK(fit.theta_hat == fit2.theta_hat);
  CHECK(fit.P_hat == fit2.P_hat);
  const auto nh = fit.N_hat();
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t j = 0; j < 50; ++j) REQUIRE(std::abs(nh(i, j) - fit.n_hat(i, j)) <= 1e-12);
  }
  CHECK(nh.matrix().maxCoeff() <= 1.0);
  CHECK(nh.matrix().minCoeff() > 0.0);

  const auto dir = std::filesystem::temp_directory_path() / "rscore_fit_roundtrip";
  save_fit(dir, fit);
  const auto back = load_fit(dir);
  CHECK(back.theta_hat == fit.theta_hat);
  CHECK(back.P_hat == fit.P_hat);
  CHECK(back.partition == fit.partition);
  std::filesystem::remove_all(dir);
}
