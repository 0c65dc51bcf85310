#pragma once

#include <cstddef>
#include <functional>

#include "gfl/graph.hpp"

namespace gfl::detail {

// Problems of the form
//
//   minimize_u  -beta * sum_i log((B u)_i) + c^T u + (rho/2) ||u - anchor||^2
//   subject to  u >= 0
//
// over the K(K-1)/2 edge weights of a K-node graph. Both the graph-learning
// objective (rho = 0) and the prox of the log-degree regularizer (rho > 0)
// have this shape.
struct LogDegreeProblem {
  std::size_t n_nodes = 0;
  Vector linear;   // c
  double beta = 0.0;
  double rho = 0.0;
  Vector anchor;   // only read when rho > 0
};

struct LogDegreeResult {
  Vector u;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Objective value; +inf when a degree falls below the domain floor.
double log_degree_objective(const LogDegreeProblem& p, const Vector& u);

/// Gradient of the smooth part (valid on the open domain).
Vector log_degree_gradient(const LogDegreeProblem& p, const Vector& u);

/// ||u - max(0, u - grad)||_2, zero exactly at a KKT point.
double projected_residual(const Vector& u, const Vector& grad);

/// Smallest degree a feasible iterate may have when beta > 0.
inline constexpr double kMinDegree = 1e-12;

/// Projected Newton (Bertsekas) with an epsilon-active set and Armijo search
/// along the projection arc. `start` must be nonnegative; it is nudged into
/// the barrier domain when needed. On exceeding max_iters the result carries
/// converged == false and the last iterate.
/// `observer`, if set, sees the objective value of every accepted iterate,
/// starting with the repaired start point.
using IterateObserver = std::function<void(const Vector& u, double objective)>;
LogDegreeResult solve_log_degree(const LogDegreeProblem& p, Vector start, double tol,
                                 int max_iters, const IterateObserver& observer = {});

}  // namespace gfl::detail
