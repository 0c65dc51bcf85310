#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "gfl/errors.hpp"
#include "gfl/graph_learning.hpp"
#include "test_support.hpp"

using namespace gfl;
namespace t = gfl::testing;

namespace {

// Objective minimized by learn_graph, as a generic log-degree problem.
Vector linear_term(const Matrix& X, const GraphLearnParams& p) {
  return (2.0 * p.alpha) * upper(distance_matrix(X)).array() + p.gamma;
}

Vector oracle_graph(const Matrix& X, const GraphLearnParams& p) {
  const auto k = static_cast<std::size_t>(X.rows());
  const Vector start = Vector::Constant(static_cast<Eigen::Index>(edge_count(k)), 0.5);
  return t::coordinate_descent_oracle(k, linear_term(X, p), p.beta, 0.0, Vector(), start,
                                      200000);
}

double oracle_value(const Matrix& X, const GraphLearnParams& p, const Vector& w) {
  return t::log_degree_value(static_cast<std::size_t>(X.rows()), linear_term(X, p), p.beta, 0.0,
                             Vector(), w);
}

Matrix two_clusters(std::mt19937_64& rng, int per_cluster, int dim, double spread,
                    double separation) {
  Matrix X = t::random_matrix(rng, 2 * per_cluster, dim, spread);
  X.topRows(per_cluster).col(0).array() += separation;
  X.bottomRows(per_cluster).col(0).array() -= separation;
  return X;
}

struct Mass {
  double intra = 0.0;
  double inter = 0.0;
};

Mass cluster_mass(const GraphWeights& g, int per_cluster) {
  Mass m;
  const EdgeList edges(g.n_nodes());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const bool a = static_cast<int>(edges.first(e)) < per_cluster;
    const bool b = static_cast<int>(edges.second(e)) < per_cluster;
    (a == b ? m.intra : m.inter) += g.weights()(static_cast<Eigen::Index>(e));
  }
  return m;
}

}  // namespace

TEST_CASE("identical rows give the uniform stationary graph") {
  for (const auto& [k, beta, gamma] :
       {std::tuple{4, 1.0, 1.0}, std::tuple{6, 0.5, 2.0}, std::tuple{9, 2.0, 0.7}}) {
    GraphLearnParams p;
    p.beta = beta;
    p.gamma = gamma;
    const Matrix X = Matrix::Constant(k, 3, 0.3);
    const GraphWeights g = learn_graph(X, p);
    const double expect = 2.0 * beta / (gamma * (k - 1));
    CHECK((g.weights().array() - expect).abs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("two separated clusters are split") {
  std::mt19937_64 rng(101);
  const Matrix X = two_clusters(rng, 4, 3, 0.1, 5.0);
  GraphLearnParams p;
  const GraphWeights g = learn_graph(X, p);
  const Mass m = cluster_mass(g, 4);
  CHECK(m.inter / m.intra < 0.1);

  const GraphWeights oracle(8, oracle_graph(X, p));
  const Mass mo = cluster_mass(oracle, 4);
  CHECK(mo.inter / mo.intra < 0.1);
  CHECK(std::abs(oracle_value(X, p, g.weights()) - oracle_value(X, p, oracle.weights())) <= 1e-6);
}

TEST_CASE("large gamma shrinks degrees and still matches the oracle") {
  std::mt19937_64 rng(103);
  const Matrix X = t::random_matrix(rng, 5, 2);
  GraphLearnParams p;
  p.gamma = 1e3;
  const GraphWeights g = learn_graph(X, p);
  CHECK(g.degrees().maxCoeff() < 0.01);
  const Vector wo = oracle_graph(X, p);
  CHECK(std::abs(oracle_value(X, p, g.weights()) - oracle_value(X, p, wo)) <= 1e-6);
}

TEST_CASE("optimality against an independent coordinate-descent solve") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 12; ++trial) {
    const int k = 3 + trial % 4;
    const Matrix X = t::random_matrix(rng, k, 3);
    GraphLearnParams p;
    p.alpha = 0.05 + 0.2 * (trial % 3);
    const GraphWeights g = learn_graph(X, p);
    CHECK((g.weights().array() >= 0.0).all());
    CHECK(g.degrees().minCoeff() > 0.0);
    const Vector wo = oracle_graph(X, p);
    const double ours = oracle_value(X, p, g.weights());
    const double ref = oracle_value(X, p, wo);
    CHECK(ours <= ref + 1e-6);
    CHECK(std::abs(ours - graph_learning_objective(X, g, p)) <= 1e-9 * std::max(1.0, std::abs(ours)));
  }
}

TEST_CASE("objective along iterates is non-increasing") {
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix X = t::random_matrix(rng, 12, 5);
    GraphLearnParams p;
    const auto trace = learn_graph_traced(X, p);
    REQUIRE(trace.objective.size() >= 2);
    for (std::size_t i = 1; i < trace.objective.size(); ++i) {
      CHECK(trace.objective[i] <= trace.objective[i - 1] + 1e-9);
    }
    CHECK(trace.residual <= p.tol);
  }
}

TEST_CASE("learn_graph reports non-convergence") {
  std::mt19937_64 rng(113);
  const Matrix X = t::random_matrix(rng, 10, 4);
  GraphLearnParams p;
  p.max_iters = 1;
  CHECK_THROWS_AS(learn_graph(X, p), NoConvergence);
  p.max_iters = 5000;
  p.gamma = -1.0;
  CHECK_THROWS_AS(learn_graph(X, p), std::invalid_argument);
  CHECK_THROWS_AS(learn_graph(Matrix::Zero(1, 3), GraphLearnParams{}), DimensionMismatch);
}

TEST_CASE("cosine_similarity_graph") {
  Matrix X(4, 2);
  X << 1, 2, 1, 2, -2, 1, -1, -2;
  const auto cg = cosine_similarity_graph(X);
  CHECK(cg.zero_rows.empty());
  CHECK(cg.graph.weight(0, 1) == doctest::Approx(1.0));
  CHECK(cg.graph.weight(0, 2) == doctest::Approx(0.0));  // orthogonal
  CHECK(cg.graph.weight(0, 3) == 0.0);                   // antiparallel, clamped

  std::mt19937_64 rng(127);
  const Matrix Y = t::random_matrix(rng, 6, 4);
  Matrix Ys = Y;
  Ys.row(2) *= 7.5;
  Ys.row(4) *= 0.01;
  CHECK((cosine_similarity_graph(Y).graph.weights() - cosine_similarity_graph(Ys).graph.weights())
            .norm() <= 1e-12);
}

TEST_CASE("cosine graph with a zero row") {
  Matrix X(3, 2);
  X << 1, 0, 0, 0, 1, 1;
  const auto cg = cosine_similarity_graph(X);
  REQUIRE(cg.zero_rows.size() == 1);
  CHECK(cg.zero_rows[0] == 1);
  CHECK(cg.graph.weight(0, 1) == 0.0);
  CHECK(cg.graph.weight(1, 2) == 0.0);
  CHECK(cg.graph.weight(0, 2) > 0.0);
  CHECK_THROWS_AS(cosine_similarity_graph_strict(X), ZeroRow);
}
