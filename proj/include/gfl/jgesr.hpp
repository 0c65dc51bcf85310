#pragma once

// Joint graph estimation and signal restoration.
//
// The server problem
//
//   min_{Psi, w}  (mu/2) ||M o Psi - X~||_Z^2 + alpha tr(W D(Psi))
//                 - beta 1^T log(W 1) + gamma ||w||_1 + indicator(w >= 0)
//
// is biconvex through tr(W D(Psi)) = 2 w^T d with d = upper(D(Psi)). Writing
// 2 w^T d = ||w + d||^2 - ||w||^2 - ||d||^2 splits it into F = f + g - h with
//
//   f = (mu/2) ||M o Psi - X~||_Z^2 + alpha ||w + d||^2
//   g = -beta 1^T log(B w) + gamma ||w||_1 + indicator(w >= 0)
//   h = alpha (||w||^2 + ||d||^2)
//
// all convex, and it is minimized with the proximal DC algorithm: a gradient
// step on f - h (h linearized) followed by the prox of g on the w block.

#include <functional>
#include <vector>

#include "gfl/errors.hpp"
#include "gfl/graph.hpp"

namespace gfl {

struct JgesrParams {
  double mu = 1.0;
  double alpha = 0.05;
  double beta = 1.0;
  double gamma = 1.0;
  double rho = 1.0;
  double epsilon = 1e-3;
  int max_outer = 500;
  double prox_tol = 1e-8;
  int prox_max_iters = 1000;

  void validate() const;
};

/// What the server receives: degraded parameters, the mask of entries that
/// arrived, and the client weights.
struct Observation {
  ParamMatrix x_tilde;
  ParamMatrix mask;  // entries in {0, 1}
  ClientWeights zeta;

  /// Throws DimensionMismatch / std::invalid_argument.
  void validate() const;
  std::size_t n_clients() const noexcept { return static_cast<std::size_t>(x_tilde.rows()); }
};

double objective_f(const ParamMatrix& psi, const Vector& w, const Observation& obs,
                   const JgesrParams& p);
/// +inf outside {w >= 0, B w > 0}.
double objective_g(const Vector& w, const JgesrParams& p);
double objective_h(const ParamMatrix& psi, const Vector& w, const JgesrParams& p);

/// f + g - h.
double objective_dc(const ParamMatrix& psi, const Vector& w, const Observation& obs,
                    const JgesrParams& p);

/// The joint objective evaluated directly from the dense adjacency. The l1
/// term counts each undirected edge once, i.e. gamma * sum_{m<n} W_mn.
double joint_objective(const ParamMatrix& psi, const Matrix& W, const Observation& obs,
                       const JgesrParams& p);

struct BlockGradient {
  ParamMatrix psi;
  Vector w;
};

BlockGradient grad_f(const ParamMatrix& psi, const Vector& w, const Observation& obs,
                     const JgesrParams& p);
BlockGradient grad_h(const ParamMatrix& psi, const Vector& w, const JgesrParams& p);

/// argmin_u g(u) + (rho/2) ||u - v||^2, using p.rho. A zero beta is allowed
/// and gives one-sided soft thresholding. Throws NoConvergence.
Vector prox_g(const Vector& v, const JgesrParams& p);
/// Same with an explicit rho (the solver may raise rho above p.rho).
Vector prox_g(const Vector& v, const JgesrParams& p, double rho);

struct JgesrState {
  ParamMatrix psi;
  Vector w;
  std::vector<double> objective_trace;  // F at the start and after every step
  std::vector<double> step_norms;       // ||Psi^{t+1} - Psi^t||_F
  double rho = 1.0;                     // proximal weight used by the last step
  int iterations = 0;
  bool converged = false;

  GraphWeights graph() const;
};

struct PdcaIterate {
  int iteration;
  double objective;
  double psi_step;
  double w_step;
  double rho;
};
using PdcaObserver = std::function<void(const PdcaIterate&)>;

class PdcaNoConvergence : public NoConvergence {
 public:
  explicit PdcaNoConvergence(JgesrState state);
  const JgesrState& state() const noexcept { return state_; }

 private:
  JgesrState state_;
};

/// Cosine-similarity graph, shifted by 1e-6 if some degree is zero so it lies
/// in the domain of g.
GraphWeights initial_graph(const ParamMatrix& x_tilde);

/// Shifts w by 1e-6 when it is outside the domain of g.
Vector repair_weights(Vector w);

/// Starting state: Psi = X~, w = repaired w0, trace holds F at the start.
JgesrState pdca_init(const Observation& obs, const GraphWeights& w0, const JgesrParams& p);

/// One PDCA iteration in place. The step is first tried with
/// max(p.rho, state.rho / 2); rho is doubled until F does not increase.
/// Returns {||dPsi||_F, ||dw||_2}.
std::pair<double, double> pdca_step(JgesrState& state, const Observation& obs,
                                    const JgesrParams& p);

/// Runs PDCA from (X~, w0) until ||dPsi||_F falls below p.epsilon (and
/// ||dw|| too when alpha = 0, where the blocks decouple). Throws PdcaNoConvergence (carrying the state) after p.max_outer
/// iterations.
JgesrState pdca_solve(const Observation& obs, const GraphWeights& w0, const JgesrParams& p,
                      const PdcaObserver& observer = {});

}  // namespace gfl
