#pragma once

#include <string>
#include <vector>

#include "gfl/graph.hpp"

namespace gfl {

struct GraphLearnParams {
  double alpha = 0.05;  // smoothness
  double beta = 1.0;    // log-degree
  double gamma = 1.0;   // sparsity
  int max_iters = 5000;
  double tol = 1e-8;

  void validate() const;
};

/// Objective alpha tr(W D(X)) - beta 1^T log(W 1) + gamma ||w||_1 for a
/// nonnegative w. Returns +inf outside the domain (negative weight or zero
/// degree). The l1 term counts each undirected edge once.
double graph_learning_objective(const ParamMatrix& X, const GraphWeights& g,
                                const GraphLearnParams& p);

/// Learns a graph on which the rows of X are smooth. The result has every
/// degree strictly positive and a projected-gradient optimality residual no
/// larger than p.tol. Throws NoConvergence (carrying the last iterate) when
/// p.max_iters is exceeded.
GraphWeights learn_graph(const ParamMatrix& X, const GraphLearnParams& p);

/// Same, warm-started from `start` (useful inside alternating schemes).
GraphWeights learn_graph(const ParamMatrix& X, const GraphLearnParams& p,
                         const GraphWeights& start);

/// Objective values along the iterates of the last solve are not exposed by
/// learn_graph; this variant returns them for diagnostics and tests.
struct GraphLearnTrace {
  GraphWeights graph;
  std::vector<double> objective;
  int iterations = 0;
  double residual = 0.0;
};
GraphLearnTrace learn_graph_traced(const ParamMatrix& X, const GraphLearnParams& p);

struct CosineGraph {
  GraphWeights graph;
  std::vector<std::size_t> zero_rows;  // rows that were disconnected
};

/// w_mn = max(0, cos(x_m, x_n)). Zero rows get zero edges and are reported
/// in `zero_rows` instead of raising.
CosineGraph cosine_similarity_graph(const ParamMatrix& X);

/// Strict variant: throws ZeroRow for the first zero row.
GraphWeights cosine_similarity_graph_strict(const ParamMatrix& X);

}  // namespace gfl
