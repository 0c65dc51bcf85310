#include "gfl/graph_learning.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gfl/detail/log_degree_solver.hpp"
#include "gfl/errors.hpp"

namespace gfl {
namespace {

detail::LogDegreeProblem make_problem(const ParamMatrix& X, const GraphLearnParams& p) {
  if (X.rows() < 2) throw DimensionMismatch("graph learning needs at least two rows");
  if (!X.allFinite()) throw std::invalid_argument("graph learning input has non-finite entries");
  detail::LogDegreeProblem prob;
  prob.n_nodes = static_cast<std::size_t>(X.rows());
  // alpha tr(W D) = 2 alpha w^T upper(D)
  prob.linear = (2.0 * p.alpha) * upper(distance_matrix(X)).array() + p.gamma;
  prob.beta = p.beta;
  prob.rho = 0.0;
  return prob;
}

// Edgewise version of the minimizer for coinciding rows, 2 beta / (c (K - 1)).
Vector default_start(const detail::LogDegreeProblem& prob) {
  const double k = static_cast<double>(prob.n_nodes);
  return (2.0 * prob.beta / (k - 1.0)) * prob.linear.array().inverse();
}

GraphLearnTrace solve(const ParamMatrix& X, const GraphLearnParams& p, Vector start,
                      bool keep_trace) {
  p.validate();
  const auto prob = make_problem(X, p);
  if (start.size() == 0) start = default_start(prob);
  GraphLearnTrace trace{GraphWeights::zeros(prob.n_nodes), {}, 0, 0.0};

  detail::IterateObserver observer;
  if (keep_trace) {
    observer = [&trace](const Vector&, double value) { trace.objective.push_back(value); };
  }
  auto r = detail::solve_log_degree(prob, std::move(start), p.tol, p.max_iters, observer);
  if (!r.converged) throw NoConvergence("learn_graph", r.iterations, r.residual, r.u);
  trace.graph = GraphWeights(prob.n_nodes, std::move(r.u));
  trace.iterations = r.iterations;
  trace.residual = r.residual;
  return trace;
}

}  // namespace

void GraphLearnParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("graph learning needs alpha, beta, gamma > 0");
  }
  if (!(tol > 0.0) || max_iters < 1) {
    throw std::invalid_argument("graph learning needs tol > 0 and max_iters >= 1");
  }
}

double graph_learning_objective(const ParamMatrix& X, const GraphWeights& g,
                                const GraphLearnParams& p) {
  const Vector deg = g.degrees();
  if (deg.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
  const Matrix W = g.dense();
  return p.alpha * (W * distance_matrix(X)).trace() - p.beta * deg.array().log().sum() +
         p.gamma * g.weights().sum();
}

GraphWeights learn_graph(const ParamMatrix& X, const GraphLearnParams& p) {
  return solve(X, p, Vector(), false).graph;
}

GraphWeights learn_graph(const ParamMatrix& X, const GraphLearnParams& p,
                         const GraphWeights& start) {
  if (start.n_nodes() != static_cast<std::size_t>(X.rows())) {
    throw DimensionMismatch("warm start graph size does not match X");
  }
  return solve(X, p, start.weights(), false).graph;
}

GraphLearnTrace learn_graph_traced(const ParamMatrix& X, const GraphLearnParams& p) {
  return solve(X, p, Vector(), true);
}

CosineGraph cosine_similarity_graph(const ParamMatrix& X) {
  const auto k = static_cast<std::size_t>(X.rows());
  const Vector norms = X.rowwise().norm();
  CosineGraph out{GraphWeights::zeros(k), {}};
  for (std::size_t i = 0; i < k; ++i) {
    if (norms(static_cast<Eigen::Index>(i)) == 0.0) out.zero_rows.push_back(i);
  }
  Vector w(static_cast<Eigen::Index>(edge_count(k)));
  Eigen::Index e = 0;
  for (Eigen::Index m = 0; m < X.rows(); ++m) {
    for (Eigen::Index n = m + 1; n < X.rows(); ++n, ++e) {
      if (norms(m) == 0.0 || norms(n) == 0.0) {
        w(e) = 0.0;
        continue;
      }
      const double c = X.row(m).dot(X.row(n)) / (norms(m) * norms(n));
      w(e) = std::max(0.0, std::min(1.0, c));
    }
  }
  out.graph = GraphWeights(k, std::move(w));
  return out;
}

GraphWeights cosine_similarity_graph_strict(const ParamMatrix& X) {
  auto cg = cosine_similarity_graph(X);
  if (!cg.zero_rows.empty()) throw ZeroRow(cg.zero_rows.front());
  return std::move(cg.graph);
}

}  // namespace gfl
