#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "gfl/aggregation.hpp"
#include "gfl/errors.hpp"
#include "gfl/jgesr.hpp"
#include "test_support.hpp"

using namespace gfl;
namespace t = gfl::testing;

namespace {

// Two disjoint cliques of sizes a and b with random positive weights.
GraphWeights block_graph(std::mt19937_64& rng, std::size_t a, std::size_t b) {
  const std::size_t k = a + b;
  Vector w = t::random_weights(rng, k, 0.5, 1.5);
  const EdgeList edges(k);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if ((edges.first(e) < a) != (edges.second(e) < a)) w(static_cast<Eigen::Index>(e)) = 0.0;
  }
  return GraphWeights(k, w);
}

ClientWeights random_zeta(std::mt19937_64& rng, std::size_t k) {
  std::uniform_int_distribution<std::size_t> n(1, 100);
  std::vector<std::size_t> counts(k);
  for (auto& c : counts) c = n(rng);
  return ClientWeights::from_counts(counts);
}

}  // namespace

TEST_CASE("aggregate_mean") {
  ParamMatrix x(2, 1);
  x << 1, 3;
  const ParamMatrix m = aggregate_mean(x, ClientWeights::uniform(2));
  CHECK(m(0, 0) == doctest::Approx(2.0));
  CHECK(m(1, 0) == doctest::Approx(2.0));

  std::mt19937_64 rng(301);
  const Matrix y = t::random_matrix(rng, 4, 3);
  Vector z = Vector::Zero(4);
  z(0) = 1.0;
  const ParamMatrix first = aggregate_mean(y, ClientWeights(z));
  for (Eigen::Index i = 0; i < 4; ++i) CHECK((first.row(i) - y.row(0)).norm() == 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    const Matrix r = t::random_matrix(rng, 7, 5);
    const ClientWeights zeta = random_zeta(rng, 7);
    const ParamMatrix out = aggregate_mean(r, zeta);
    for (Eigen::Index j = 0; j < 5; ++j) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < 7; ++i) s += zeta[static_cast<std::size_t>(i)] * r(i, j);
      for (Eigen::Index i = 0; i < 7; ++i) CHECK(std::abs(out(i, j) - s) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(aggregate_mean(y, ClientWeights::uniform(3)), DimensionMismatch);
}

TEST_CASE("aggregate_smooth examples") {
  std::mt19937_64 rng(307);
  const Matrix x = t::random_matrix(rng, 5, 3);
  const GraphWeights g(5, t::random_weights(rng, 5));
  AggregationParams p;
  p.alpha = 0.0;
  CHECK((aggregate_smooth(x, g, random_zeta(rng, 5), p) - x).norm() <= 1e-12);

  // [[2, -1], [-1, 2]] Psi = X
  ParamMatrix two(2, 1);
  two << 1, 0;
  p.mu = 1.0;
  p.alpha = 0.5;
  const ParamMatrix psi = aggregate_smooth(two, GraphWeights(2, Vector::Constant(1, 1.0)),
                                           ClientWeights::uniform(2), AggregationParams{2.0, 1.0});
  // Z = I/2 here, so (Z + L) Psi = Z X gives [[3/2, -1], [-1, 3/2]] Psi = X/2.
  Matrix A(2, 2);
  A << 1.5, -1, -1, 1.5;
  const Vector expect = A.lu().solve(Vector(two.col(0) * 0.5));
  CHECK((psi.col(0) - expect).norm() <= 1e-14);

  // Unit client weights reproduce the 2x2 example exactly: with 2 alpha/mu = 1
  // and Z = I the solution is [2/3, 1/3].
  Vector ones = Vector::Ones(2);
  Matrix Aunit(2, 2);
  Aunit << 2, -1, -1, 2;
  const Vector unit = Aunit.lu().solve(Vector(two.col(0)));
  CHECK(std::abs(unit(0) - 2.0 / 3.0) <= 1e-14);
  CHECK(std::abs(unit(1) - 1.0 / 3.0) <= 1e-14);
}

TEST_CASE("aggregate_smooth large-alpha limit on a connected graph") {
  std::mt19937_64 rng(311);
  const Matrix x = t::random_matrix(rng, 8, 4);
  const GraphWeights g(8, t::random_weights(rng, 8, 0.1, 1.0));
  const ParamMatrix out = aggregate_smooth(x, g, ClientWeights::uniform(8), AggregationParams{1.0, 1e8});
  const ParamMatrix mean = aggregate_mean(x, ClientWeights::uniform(8));
  CHECK((out - mean).norm() <= 1e-4);
}

TEST_CASE("aggregate_smooth satisfies its normal equations") {
  std::mt19937_64 rng(313);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = t::random_matrix(rng, 9, 6);
    const GraphWeights g(9, t::random_weights(rng, 9));
    const ClientWeights zeta = random_zeta(rng, 9);
    const AggregationParams p{0.5 + 0.1 * trial, 0.01 * (trial + 1)};
    const ParamMatrix psi = aggregate_smooth(x, g, zeta, p);
    const Matrix Z = zeta.values().asDiagonal();
    const Matrix A = Z + (2.0 * p.alpha / p.mu) * build_laplacian(g);
    CHECK((A * psi - Z * x).norm() <= 1e-8 * (Z * x).norm());

    const ParamMatrix same = Matrix::Ones(9, 1) * x.row(0);
    CHECK((aggregate_smooth(same, g, ClientWeights::uniform(9), p) - same).norm() <= 1e-12);
  }
}

TEST_CASE("aggregate_smooth detects a singular system") {
  // Node 2 has zero weight and no edges.
  Vector z(3);
  z << 0.5, 0.5, 0.0;
  Vector w(3);
  w << 1, 0, 0;
  const Matrix x = Matrix::Ones(3, 2);
  CHECK_THROWS_AS(aggregate_smooth(x, GraphWeights(3, w), ClientWeights(z), AggregationParams{}),
                  SingularSystem);
}

TEST_CASE("aggregate_clusterwise") {
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  const ParamMatrix out = aggregate_clusterwise(x, Clustering({0, 0, 1}));
  CHECK(out(0, 0) == 2.0);
  CHECK(out(1, 1) == 3.0);
  CHECK((out.row(2) - x.row(2)).norm() == 0.0);

  std::mt19937_64 rng(317);
  const Matrix y = t::random_matrix(rng, 6, 3);
  CHECK((aggregate_clusterwise(y, Clustering(std::vector<std::size_t>(6, 0))) -
         aggregate_mean(y, ClientWeights::uniform(6)))
            .norm() <= 1e-12);

  const Clustering c({1, 0, 2, 1, 0, 2});
  const ParamMatrix once = aggregate_clusterwise(y, c);
  CHECK((aggregate_clusterwise(once, c) - once).norm() <= 1e-12);

  CHECK_THROWS_AS(Clustering({0, 2}), std::invalid_argument);
}

TEST_CASE("large-alpha smoothing on a block graph is the cluster-wise mean") {
  std::mt19937_64 rng(331);
  for (int trial = 0; trial < 5; ++trial) {
    const GraphWeights g = block_graph(rng, 4, 6);
    const Matrix x = t::random_matrix(rng, 10, 5);
    const ParamMatrix smooth =
        aggregate_smooth(x, g, ClientWeights::uniform(10), AggregationParams{1.0, 1e8});
    std::vector<std::size_t> labels(10, 1);
    for (std::size_t i = 0; i < 4; ++i) labels[i] = 0;
    CHECK((smooth - aggregate_clusterwise(x, Clustering(labels))).norm() <= 1e-4);
  }
}

TEST_CASE("aggregate_adjacency") {
  Matrix x(2, 3);
  x << 1, 2, 3, 4, 5, 6;
  const ParamMatrix out = aggregate_adjacency(x, GraphWeights(2, Vector::Constant(1, 1.0)));
  CHECK((out.row(0) - x.row(1)).norm() <= 1e-15);
  CHECK((out.row(1) - x.row(0)).norm() <= 1e-15);

  // Cycle on 5 nodes with equal weights is regular.
  Matrix W = Matrix::Zero(5, 5);
  for (Eigen::Index i = 0; i < 5; ++i) W(i, (i + 1) % 5) = W((i + 1) % 5, i) = 0.7;
  const Matrix c = Matrix::Constant(5, 2, 1.5);
  CHECK((aggregate_adjacency(c, GraphWeights::from_dense(W)) - c).norm() <= 1e-14);

  Vector w(3);
  w << 1, 0, 0;
  CHECK_THROWS_AS(aggregate_adjacency(Matrix::Ones(3, 1), GraphWeights(3, w)), IsolatedNode);
}

TEST_CASE("adjacency filter is the first-order expansion of the normalized filter") {
  // The normalized Laplacian does not change when all weights are scaled,
  // so the small parameter multiplies L-hat itself.
  std::mt19937_64 rng(337);
  for (int trial = 0; trial < 5; ++trial) {
    const GraphWeights g(7, t::random_weights(rng, 7, 0.1, 1.0));
    const Matrix x = t::random_matrix(rng, 7, 4);
    const Matrix Ln = normalized_laplacian(g);
    const Matrix I = Matrix::Identity(7, 7);
    CHECK(((I - Ln) * x - aggregate_adjacency(x, g)).norm() <= 1e-12);
    auto gap = [&](double eps) {
      const Matrix exact = (I + eps * Ln).lu().solve(x);
      return (exact - (I - eps * Ln) * x).norm();
    };
    const double ratio = gap(0.1) / gap(0.01);
    CHECK(ratio >= 100.0 / 3.0);
    CHECK(ratio <= 300.0);
    CHECK(gap(0.01) <= 1e-3 * x.norm());
  }
}

TEST_CASE("clustering_from_graph") {
  std::mt19937_64 rng(347);
  const GraphWeights g = block_graph(rng, 3, 4);
  const Clustering c = clustering_from_graph(g);
  CHECK(c.n_clusters() == 2);
  CHECK(c.label(0) == c.label(2));
  CHECK(c.label(3) == c.label(6));
  CHECK(c.label(0) != c.label(3));
  CHECK(clustering_from_graph(GraphWeights::zeros(4)).n_clusters() == 4);
}

TEST_CASE("restore_masked with a full mask is smoothing with doubled alpha") {
  std::mt19937_64 rng(349);
  const Matrix x = t::random_matrix(rng, 6, 3);
  const GraphWeights g(6, t::random_weights(rng, 6));
  const ClientWeights zeta = random_zeta(rng, 6);
  const ParamMatrix r = restore_masked(x, Matrix::Ones(6, 3), g, zeta, 1.3, 0.2);
  const ParamMatrix s = aggregate_smooth(x, g, zeta, AggregationParams{1.3, 0.4});
  CHECK((r - s).norm() <= 1e-10);
}

TEST_CASE("restore_masked minimizes the masked objective over Psi") {
  std::mt19937_64 rng(353);
  for (int trial = 0; trial < 5; ++trial) {
    const Observation obs = t::random_observation(rng, 6, 4, 0.3);
    const Vector w = t::random_weights(rng, 6, 0.1, 1.0);
    JgesrParams p;
    p.alpha = 0.3;
    const ParamMatrix psi = restore_masked(obs.x_tilde, obs.mask, GraphWeights(6, w), obs.zeta,
                                           p.mu, p.alpha);
    const Matrix W = t::dense_from_upper(w, 6);
    auto objective = [&](const Matrix& y) { return joint_objective(y, W, obs, p); };
    const Matrix grad = t::fd_gradient(objective, psi);
    CHECK(grad.norm() <= 1e-6);
  }
}

TEST_CASE("restore_masked fills components with no observation") {
  // Nodes {0, 1} linked, node 2 isolated; column 0 misses both 0 and 1.
  Vector w(3);
  w << 1, 0, 0;
  Matrix mask(3, 2);
  mask << 0, 1, 0, 1, 1, 1;
  Matrix x(3, 2);
  x << 0, 1, 0, 2, 4, 3;
  const ParamMatrix psi =
      restore_masked(x.cwiseProduct(mask), mask, GraphWeights(3, w), ClientWeights::uniform(3), 1.0, 0.5);
  CHECK(psi(0, 0) == doctest::Approx(4.0));
  CHECK(psi(1, 0) == doctest::Approx(4.0));
  CHECK(psi(2, 0) == doctest::Approx(4.0));
  CHECK(psi.allFinite());
}

TEST_CASE("two-step examples") {
  std::mt19937_64 rng(359);
  GraphLearnParams glp;
  SUBCASE("noiseless input, small alpha stays near the input") {
    const Matrix x = t::random_matrix(rng, 6, 3);
    AggregationParams ap{1.0, 1e-6};
    const auto r = aggregate_two_step(x, Matrix::Ones(6, 3), ClientWeights::uniform(6), glp, ap, 1);
    CHECK((r.psi - x).norm() <= 1e-3);
  }
  SUBCASE("alpha = 0 returns the input") {
    const Matrix x = t::random_matrix(rng, 6, 3);
    AggregationParams ap{1.0, 0.0};
    const auto r = aggregate_two_step(x, Matrix::Ones(6, 3), ClientWeights::uniform(6), glp, ap, 3);
    CHECK((r.psi - x).norm() <= 1e-12);
  }
  SUBCASE("objective does not increase") {
    for (int trial = 0; trial < 10; ++trial) {
      const Observation obs = t::random_observation(rng, 8, 5, 0.2);
      AggregationParams ap{1.0, glp.alpha};
      const auto r = aggregate_two_step(obs.x_tilde, obs.mask, obs.zeta, glp, ap, 3);
      CHECK(r.objective_final <= r.objective_initial + 1e-9 * std::abs(r.objective_initial));
    }
  }
  SUBCASE("planted clusters") {
    const Matrix centers = t::random_matrix(rng, 2, 6, 3.0);
    Matrix x(10, 6);
    for (Eigen::Index i = 0; i < 10; ++i) x.row(i) = centers.row(i < 5 ? 0 : 1);
    x += t::random_matrix(rng, 10, 6, 0.1);
    AggregationParams ap{1.0, glp.alpha};
    const auto r = aggregate_two_step(x, Matrix::Ones(10, 6), ClientWeights::uniform(10), glp, ap, 3);
    double intra = 0.0;
    double inter = 0.0;
    const EdgeList edges(10);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const bool same = (edges.first(e) < 5) == (edges.second(e) < 5);
      (same ? intra : inter) += r.graph.weights()(static_cast<Eigen::Index>(e));
    }
    CHECK(intra > 5.0 * inter);
  }
}
