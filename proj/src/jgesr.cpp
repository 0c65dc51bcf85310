#include "gfl/jgesr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gfl/detail/log_degree_solver.hpp"
#include "gfl/graph_learning.hpp"

namespace gfl {
namespace {

constexpr double kRepairShift = 1e-6;
constexpr int kMaxRhoDoublings = 60;

void check_pair(const ParamMatrix& psi, const Vector& w) {
  if (static_cast<std::size_t>(w.size()) != edge_count(static_cast<std::size_t>(psi.rows()))) {
    throw DimensionMismatch("edge vector has " + std::to_string(w.size()) +
                            " entries but Psi has " + std::to_string(psi.rows()) + " rows");
  }
}

void check_obs(const ParamMatrix& psi, const Observation& obs) {
  if (psi.rows() != obs.x_tilde.rows() || psi.cols() != obs.x_tilde.cols()) {
    throw DimensionMismatch("Psi and X~ shapes differ");
  }
}

// M o Psi - X~
ParamMatrix fidelity_residual(const ParamMatrix& psi, const Observation& obs) {
  return obs.mask.cwiseProduct(psi) - obs.x_tilde;
}

// (A + A^T) Psi with A = D*(vec^{-1}(T^T r)): the gradient of <r, upper(D(Psi))>
// with respect to Psi.
ParamMatrix pairwise_gradient(const Vector& r, const ParamMatrix& psi) {
  const Matrix A = distance_adjoint(scatter_upper(r, static_cast<std::size_t>(psi.rows())));
  return (A + A.transpose()) * psi;
}

}  // namespace

void JgesrParams::validate() const {
  if (!(mu > 0.0) || !(alpha >= 0.0) || !(beta > 0.0) || !(gamma > 0.0) || !(rho > 0.0)) {
    throw std::invalid_argument("JGESR needs mu, beta, gamma, rho > 0 and alpha >= 0");
  }
  if (!(epsilon > 0.0) || !(prox_tol > 0.0) || max_outer < 1 || prox_max_iters < 1) {
    throw std::invalid_argument("JGESR needs positive tolerances and iteration caps");
  }
}

void Observation::validate() const {
  if (x_tilde.rows() != mask.rows() || x_tilde.cols() != mask.cols()) {
    throw DimensionMismatch("mask shape differs from X~");
  }
  if (zeta.size() != static_cast<std::size_t>(x_tilde.rows())) {
    throw DimensionMismatch("client weights length differs from the number of rows of X~");
  }
  if (!((mask.array() == 0.0) || (mask.array() == 1.0)).all()) {
    throw std::invalid_argument("mask entries must be 0 or 1");
  }
  if (!x_tilde.allFinite()) throw std::invalid_argument("X~ has non-finite entries");
}

double objective_f(const ParamMatrix& psi, const Vector& w, const Observation& obs,
                   const JgesrParams& p) {
  check_pair(psi, w);
  check_obs(psi, obs);
  const ParamMatrix r = fidelity_residual(psi, obs);
  // tr(R^T Z R) = sum_k zeta_k ||r_k||^2
  const double fid = obs.zeta.values().dot(r.rowwise().squaredNorm());
  const Vector d = upper(distance_matrix(psi));
  return 0.5 * p.mu * fid + p.alpha * (w + d).squaredNorm();
}

double objective_g(const Vector& w, const JgesrParams& p) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if ((w.array() < 0.0).any()) return inf;
  const std::size_t k = nodes_for_edge_count(static_cast<std::size_t>(w.size()));
  const Vector deg = apply_B(w, k);
  if (p.beta > 0.0) {
    if (!(deg.array() > 0.0).all()) return inf;
    return -p.beta * deg.array().log().sum() + p.gamma * w.sum();
  }
  return p.gamma * w.sum();
}

double objective_h(const ParamMatrix& psi, const Vector& w, const JgesrParams& p) {
  check_pair(psi, w);
  const Vector d = upper(distance_matrix(psi));
  return p.alpha * (w.squaredNorm() + d.squaredNorm());
}

double objective_dc(const ParamMatrix& psi, const Vector& w, const Observation& obs,
                    const JgesrParams& p) {
  return objective_f(psi, w, obs, p) + objective_g(w, p) - objective_h(psi, w, p);
}

double joint_objective(const ParamMatrix& psi, const Matrix& W, const Observation& obs,
                       const JgesrParams& p) {
  if (W.rows() != psi.rows() || W.cols() != psi.rows()) {
    throw DimensionMismatch("adjacency size differs from the number of rows of Psi");
  }
  check_obs(psi, obs);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; m < W.rows(); ++m) {
    if (W(m, m) != 0.0) return inf;
    for (Eigen::Index n = 0; n < W.cols(); ++n) {
      if (W(m, n) < 0.0 || W(m, n) != W(n, m)) return inf;
    }
  }
  const Vector deg = W.rowwise().sum();
  if (!(deg.array() > 0.0).all()) return inf;

  const ParamMatrix r = fidelity_residual(psi, obs);
  const Matrix Z = obs.zeta.values().asDiagonal();
  const double fidelity = 0.5 * p.mu * (r.transpose() * Z * r).trace();
  const double smooth = p.alpha * (W * distance_matrix(psi)).trace();
  const double log_degree = -p.beta * deg.array().log().sum();
  const double sparsity = p.gamma * 0.5 * W.cwiseAbs().sum();
  return fidelity + smooth + log_degree + sparsity;
}

BlockGradient grad_f(const ParamMatrix& psi, const Vector& w, const Observation& obs,
                     const JgesrParams& p) {
  check_pair(psi, w);
  check_obs(psi, obs);
  const Vector r = w + upper(distance_matrix(psi));
  ParamMatrix g_psi =
      p.mu * obs.mask.cwiseProduct(obs.zeta.values().asDiagonal() * fidelity_residual(psi, obs));
  g_psi += (2.0 * p.alpha) * pairwise_gradient(r, psi);
  return {std::move(g_psi), (2.0 * p.alpha) * r};
}

BlockGradient grad_h(const ParamMatrix& psi, const Vector& w, const JgesrParams& p) {
  check_pair(psi, w);
  const Vector d = upper(distance_matrix(psi));
  return {(2.0 * p.alpha) * pairwise_gradient(d, psi), (2.0 * p.alpha) * w};
}

Vector prox_g(const Vector& v, const JgesrParams& p) { return prox_g(v, p, p.rho); }

Vector prox_g(const Vector& v, const JgesrParams& p, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("prox_g needs rho > 0");
  detail::LogDegreeProblem prob;
  prob.n_nodes = nodes_for_edge_count(static_cast<std::size_t>(v.size()));
  prob.linear = Vector::Constant(v.size(), p.gamma);
  prob.beta = p.beta;
  prob.rho = rho;
  prob.anchor = v;
  auto r = detail::solve_log_degree(prob, v.cwiseMax(0.0), p.prox_tol, p.prox_max_iters);
  if (!r.converged) throw NoConvergence("prox_g", r.iterations, r.residual, r.u);
  return std::move(r.u);
}

GraphWeights JgesrState::graph() const {
  return GraphWeights(nodes_for_edge_count(static_cast<std::size_t>(w.size())), w);
}

PdcaNoConvergence::PdcaNoConvergence(JgesrState state)
    : NoConvergence("pdca_solve", state.iterations,
                    state.step_norms.empty() ? 0.0 : state.step_norms.back(), state.w),
      state_(std::move(state)) {}

Vector repair_weights(Vector w) {
  const std::size_t k = nodes_for_edge_count(static_cast<std::size_t>(w.size()));
  w = w.cwiseMax(0.0);
  if (apply_B(w, k).minCoeff() <= 0.0) w.array() += kRepairShift;
  return w;
}

GraphWeights initial_graph(const ParamMatrix& x_tilde) {
  const auto cg = cosine_similarity_graph(x_tilde);
  return GraphWeights(cg.graph.n_nodes(), repair_weights(cg.graph.weights()));
}

JgesrState pdca_init(const Observation& obs, const GraphWeights& w0, const JgesrParams& p) {
  p.validate();
  obs.validate();
  if (w0.n_nodes() != obs.n_clients()) {
    throw DimensionMismatch("initial graph size differs from the number of clients");
  }
  JgesrState s;
  s.psi = obs.x_tilde;
  s.w = repair_weights(w0.weights());
  s.rho = p.rho;
  s.objective_trace.push_back(objective_dc(s.psi, s.w, obs, p));
  return s;
}

std::pair<double, double> pdca_step(JgesrState& s, const Observation& obs, const JgesrParams& p) {
  const BlockGradient u = grad_f(s.psi, s.w, obs, p);
  const BlockGradient h = grad_h(s.psi, s.w, p);
  const ParamMatrix dir_psi = u.psi - h.psi;
  const Vector dir_w = u.w - h.w;
  const double current = s.objective_trace.empty() ? objective_dc(s.psi, s.w, obs, p)
                                                   : s.objective_trace.back();
  const double slack = 1e-12 * std::max(1.0, std::abs(current));

  double rho = std::max(p.rho, 0.5 * s.rho);
  ParamMatrix psi_next;
  Vector w_next;
  double value = current;
  for (int k = 0;; ++k, rho *= 2.0) {
    psi_next = s.psi - dir_psi / rho;
    w_next = prox_g(s.w - dir_w / rho, p, rho);
    value = objective_dc(psi_next, w_next, obs, p);
    if (value <= current + slack) break;
    if (k >= kMaxRhoDoublings) {
      // No decrease found at any scale: the iterate is stationary to
      // machine precision.
      psi_next = s.psi;
      w_next = s.w;
      value = current;
      break;
    }
  }

  const double psi_step = (psi_next - s.psi).norm();
  const double w_step = (w_next - s.w).norm();
  s.psi = std::move(psi_next);
  s.w = std::move(w_next);
  s.rho = rho;
  s.objective_trace.push_back(value);
  s.step_norms.push_back(psi_step);
  ++s.iterations;
  return {psi_step, w_step};
}

JgesrState pdca_solve(const Observation& obs, const GraphWeights& w0, const JgesrParams& p,
                      const PdcaObserver& observer) {
  JgesrState s = pdca_init(obs, w0, p);
  if (observer) observer({0, s.objective_trace.back(), 0.0, 0.0, s.rho});
  while (s.iterations < p.max_outer) {
    const auto [psi_step, w_step] = pdca_step(s, obs, p);
    if (observer) observer({s.iterations, s.objective_trace.back(), psi_step, w_step, s.rho});
    // With alpha = 0 the Psi step does not see w at all, so a stalled Psi
    // says nothing about the graph block.
    if (psi_step < p.epsilon && (p.alpha > 0.0 || w_step < p.epsilon)) {
      s.converged = true;
      return s;
    }
  }
  throw PdcaNoConvergence(std::move(s));
}

}  // namespace gfl
