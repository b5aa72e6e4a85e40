#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "rscore/errors.hpp"
#include "rscore/model.hpp"
#include "rscore/pipeline.hpp"
#include "rscore/spectral.hpp"
#include "support.hpp"

using namespace rscore;

namespace {

Eigen::MatrixXd random_symmetric(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

void check_pairs(const Eigen::MatrixXd& m, const EigenPairs& p, double tol) {
  const double norm = std::max(std::abs(p.values(0)), 1e-300);
  for (Eigen::Index c = 0; c < p.values.size(); ++c) {
    const double res = (m * p.vectors.col(c) - p.values(c) * p.vectors.col(c)).norm();
    REQUIRE(res <= tol * norm);
    if (c > 0) REQUIRE(std::abs(p.values(c)) <= std::abs(p.values(c - 1)));
  }
  const Eigen::MatrixXd gram = p.vectors.transpose() * p.vectors;
  REQUIRE((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-8);
}

// Exhaustive minimum of the k-means objective over all labelings.
double exhaustive_kmeans(const Eigen::MatrixXd& pts, int k) {
  const auto n = static_cast<std::size_t>(pts.rows());
  std::vector<int> lab(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<int> copy = lab;
    bool full = true;
    std::vector<int> seen(static_cast<std::size_t>(k), 0);
    for (int l : copy) seen[static_cast<std::size_t>(l)] = 1;
    for (int s : seen) full = full && s;
    if (full) best = std::min(best, kmeans_objective(pts, Partition(copy, k)));
    std::size_t i = 0;
    while (i < n && lab[i] == k - 1) lab[i++] = 0;
    if (i == n) break;
    ++lab[i];
  }
  return best;
}

}  // namespace

TEST_CASE("top_k_eigenpairs small cases") {
  const Eigen::Matrix3d d = Eigen::Vector3d(3.0, -2.0, 1.0).asDiagonal();
  const auto p = top_k_eigenpairs(DenseSymMatrix(d), 2);
  CHECK(p.values(0) == doctest::Approx(3.0));
  CHECK(p.values(1) == doctest::Approx(-2.0));
  CHECK(p.vectors(0, 0) == doctest::Approx(1.0));
  CHECK(p.vectors(1, 1) == doctest::Approx(1.0));

  const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(20, 0.5, 2.0);
  const auto r1 = top_k_eigenpairs(DenseSymMatrix(theta * theta.transpose()), 1);
  CHECK(r1.values(0) == doctest::Approx(theta.squaredNorm()).epsilon(1e-12));
  CHECK((r1.vectors.col(0) - theta.normalized()).norm() < 1e-10);

  CHECK_THROWS_AS(top_k_eigenpairs(DenseSymMatrix(d), 4), ConfigError);
}

TEST_CASE("dense eigenpairs match a Jacobi oracle") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd m = random_symmetric(rng, 50);
    Eigen::VectorXd vals;
    Eigen::MatrixXd vecs;
    test::jacobi_eigen(m, vals, vecs);
    std::vector<double> sorted(vals.data(), vals.data() + vals.size());
    std::sort(sorted.begin(), sorted.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
    const auto p = top_k_eigenpairs(DenseSymMatrix(m), 5);
    for (int c = 0; c < 5; ++c) CHECK(p.values(c) == doctest::Approx(sorted[static_cast<std::size_t>(c)]).epsilon(1e-9));
    check_pairs(m, p, 1e-9);
    // sign convention: largest-magnitude entry positive
    for (int c = 0; c < 5; ++c) {
      Eigen::Index at = 0;
      p.vectors.col(c).cwiseAbs().maxCoeff(&at);
      CHECK(p.vectors(at, c) > 0.0);
    }
    const auto again = top_k_eigenpairs(DenseSymMatrix(m), 5);
    CHECK(again.vectors == p.vectors);
    CHECK(again.values == p.values);
  }
}

TEST_CASE("Lanczos agrees with the dense route") {
  Rng rng(41);
  for (int rep = 0; rep < 5; ++rep) {
    const auto a = test::random_graph(rng, 300, 0.05 + 0.05 * rep);
    const WeightedAdjacency w(a, [&](std::size_t i, std::size_t j) { return 1.0 + 0.01 * static_cast<double>((i + j) % 7); });
    const auto dense = top_k_eigenpairs(w.to_dense(), 4);
    EigenOptions opts;
    opts.dense_limit = 50;
    const auto lz = top_k_eigenpairs(w, 4, opts);
    for (int c = 0; c < 4; ++c) CHECK(lz.values(c) == doctest::Approx(dense.values(c)).epsilon(1e-9));
    check_pairs(w.to_dense().matrix(), lz, 1e-7);
    for (int c = 0; c < 4; ++c) CHECK(std::abs(lz.vectors.col(c).dot(dense.vectors.col(c))) == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("SCORE embedding") {
  EigenPairs p;
  p.values = Eigen::Vector2d(2.0, 1.0);
  p.vectors.resize(4, 2);
  p.vectors.col(0) << 0.5, 0.5, 0.5, 0.5;
  p.vectors.col(1) = p.vectors.col(0);
  const auto same = score_embedding(p, kNoClip);
  CHECK(same.ratios.isApprox(Eigen::MatrixXd::Ones(4, 1)));

  p.vectors.col(0) << 1e-12, 0.5, 0.5, 0.5;
  p.vectors.col(1) << 0.5, 0.5, -0.5, 0.1;
  const auto clipped = score_embedding(p);
  CHECK(clipped.clip == doctest::Approx(std::log(4.0)));
  CHECK(clipped.ratios(0, 0) == doctest::Approx(std::log(4.0)));
  CHECK(clipped.ratios(2, 0) == doctest::Approx(-1.0));

  p.vectors.col(0) << 0.0, 0.5, 0.5, 0.5;
  p.vectors.col(1) << -0.5, 0.5, -0.5, 0.1;
  const auto degen = score_embedding(p, 3.0);
  CHECK(degen.degenerate_nodes == std::vector<std::size_t>{0});
  CHECK(degen.ratios(0, 0) == -3.0);
  const auto unclipped = score_embedding(p, kNoClip);
  CHECK(unclipped.ratios(0, 0) == doctest::Approx(-std::log(4.0)));
}

TEST_CASE("k-means") {
  SUBCASE("separated clusters") {
    Rng rng(1);
    Eigen::MatrixXd pts(60, 2);
    std::vector<int> truth;
    for (int i = 0; i < 60; ++i) {
      const int c = i % 3;
      truth.push_back(c);
      pts(i, 0) = 100.0 * c + rng.uniform(-1.0, 1.0);
      pts(i, 1) = -50.0 * c + rng.uniform(-1.0, 1.0);
    }
    Rng krng(5);
    const auto res = kmeans(pts, 3, krng);
    CHECK(hamming_error(res.partition, Partition(truth, 3)) == 0.0);
    CHECK(res.partition == res.partition.canonical());
  }
  SUBCASE("identical points") {
    const Eigen::MatrixXd pts = Eigen::MatrixXd::Ones(10, 2);
    Rng krng(5);
    const auto res = kmeans(pts, 2, krng);
    CHECK(res.objective == 0.0);
  }
  SUBCASE("matches the exhaustive optimum on 12 points") {
    Rng rng(77);
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::MatrixXd pts(12, 2);
      for (Eigen::Index i = 0; i < 12; ++i) {
        pts(i, 0) = rng.uniform(-1.0, 1.0);
        pts(i, 1) = rng.uniform(-1.0, 1.0);
      }
      for (int k : {2, 3}) {
        Rng krng(rep);
        KMeansOptions opts;
        opts.restarts = 50;
        const auto res = kmeans(pts, k, krng, opts);
        CHECK(res.objective <= exhaustive_kmeans(pts, k) + 1e-9);
        CHECK(res.objective == doctest::Approx(kmeans_objective(pts, res.partition)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("deterministic and permutation equivariant") {
    Rng rng(8);
    Eigen::MatrixXd pts(30, 2);
    for (Eigen::Index i = 0; i < 30; ++i) {
      pts(i, 0) = rng.uniform() + (i % 2) * 3.0;
      pts(i, 1) = rng.uniform();
    }
    Rng a(3), b(3);
    CHECK(kmeans(pts, 2, a).partition == kmeans(pts, 2, b).partition);
    std::vector<int> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    Rng sh(4);
    sh.shuffle(std::span<int>(perm));
    Eigen::MatrixXd permuted(30, 2);
    for (int i = 0; i < 30; ++i) permuted.row(i) = pts.row(perm[static_cast<std::size_t>(i)]);
    Rng c(3);
    const auto orig = kmeans(pts, 2, c).partition;
    Rng d(3);
    const auto moved = kmeans(permuted, 2, d).partition;
    std::vector<int> mapped(30);
    for (int i = 0; i < 30; ++i) mapped[static_cast<std::size_t>(i)] = orig[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    CHECK(hamming_error(moved, Partition(mapped, 2)) == 0.0);
  }
  Rng krng(1);
  CHECK_THROWS_AS(kmeans(Eigen::MatrixXd::Zero(2, 2), 3, krng), ConfigError);
}

TEST_CASE("SCORE recovers noiseless DCBMs exactly") {
  Rng rng(99);
  int done = 0;
  while (done < 20) {
    const int k = 2 + static_cast<int>(rng.below(4));
    const auto p = test::random_params(rng, 90 + rng.below(60), k, 0.2, 2.0, 0.6, 10);
    if (min_abs_eigenvalue(p.P) < 0.05) continue;
    ++done;
    const auto tilde = build_tilde_omega(p);
    Rng srng(done);
    const auto res = score_detailed(tilde, k, srng);
    CHECK(hamming_error(res.partition, p.pi) == 0.0);
    // K distinct embedding rows
    std::set<std::vector<long long>> rows;
    for (Eigen::Index i = 0; i < res.embedding.ratios.rows(); ++i) {
      std::vector<long long> key;
      for (Eigen::Index c = 0; c < res.embedding.ratios.cols(); ++c) key.push_back(std::llround(res.embedding.ratios(i, c) * 1e6));
      rows.insert(key);
    }
    CHECK(rows.size() == static_cast<std::size_t>(k));

    // positive scaling leaves the partition unchanged
    Rng s1(7), s2(7);
    CHECK(score(tilde, k, s1) == score(DenseSymMatrix(3.5 * tilde.matrix()), k, s2));
  }
}

TEST_CASE("SCORE on the logit mean beats SCORE on sampled A") {
  // Setting (A) parameters at n = 300.
  double err_mean = 0.0, err_sample = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    ModelParams p;
    const std::vector<std::size_t> sizes{100, 100, 100};
    p.pi = gen_partition(300, sizes);
    p.theta = gen_theta(ThetaSpec::uniform(0.01, 2.0, 60.0), 300, rng);
    p.P = uniform_offdiag_mixing(3, 23.0 / 30.0);
    const auto lm = logit_link(build_tilde_omega(p));
    Rng s1(seed), s2(seed);
    err_mean += hamming_error(score(lm.omega, 3, s1), p.pi);
    const auto a = sample_adjacency(lm.omega, rng);
    err_sample += hamming_error(score_adjacency(a, 3, s2, {}).partition, p.pi);
  }
  CHECK(err_mean < err_sample);
  CHECK(err_sample > 0.0);
}
