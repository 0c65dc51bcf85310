#include "gfl/detail/log_degree_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gfl::detail {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;
constexpr double kActiveCap = 1e-3;
constexpr double kRoundingBand = 1e-13;

Vector degrees_of(const LogDegreeProblem& p, const Vector& u) { return apply_B(u, p.n_nodes); }

bool in_domain(const LogDegreeProblem& p, const Vector& deg) {
  return p.beta <= 0.0 || deg.minCoeff() >= kMinDegree;
}

// Newton direction on the free coordinates, diagonally scaled gradient on
// the active ones.
Vector newton_direction(const LogDegreeProblem& p, const EdgeList& edges, const Vector& deg,
                        const Vector& grad, const std::vector<char>& active, double residual) {
  const auto n_edges = static_cast<Eigen::Index>(edges.size());
  const auto k = static_cast<Eigen::Index>(p.n_nodes);
  Vector lambda = Vector::Zero(k);
  if (p.beta > 0.0) lambda = deg.array().square().inverse();

  // Without a proximal term the Hessian is singular along null directions
  // of B; a ridge proportional to the residual (Levenberg style) keeps the
  // steps bounded there while preserving fast local convergence.
  const double ridge = p.rho > 0.0 ? 0.0 : std::max(1e-12, std::min(1.0, residual));
  const double shift = p.rho + ridge;

  Vector dir = Vector::Zero(n_edges);
  std::vector<Eigen::Index> free;
  free.reserve(edges.size());
  for (Eigen::Index e = 0; e < n_edges; ++e) {
    const double diag = shift + p.beta * (lambda(static_cast<Eigen::Index>(edges.first(e))) +
                                          lambda(static_cast<Eigen::Index>(edges.second(e))));
    if (active[static_cast<std::size_t>(e)]) {
      dir(e) = -grad(e) / diag;
    } else {
      free.push_back(e);
    }
  }
  if (free.empty()) return dir;

  if (p.beta <= 0.0) {
    for (auto e : free) dir(e) = -grad(e) / shift;
    return dir;
  }

  if (p.rho > 0.0) {
    // (rho I + beta B_F^T Lambda B_F)^{-1} g
    //   = (1/rho) [g - B_F^T ((rho/beta) Lambda^{-1} + B_F B_F^T)^{-1} B_F g]
    Matrix S = Matrix::Zero(k, k);
    S.diagonal() = (p.rho / p.beta) * deg.array().square().matrix();
    Vector y = Vector::Zero(k);
    for (auto e : free) {
      const auto m = static_cast<Eigen::Index>(edges.first(static_cast<std::size_t>(e)));
      const auto n = static_cast<Eigen::Index>(edges.second(static_cast<std::size_t>(e)));
      S(m, m) += 1.0;
      S(n, n) += 1.0;
      S(m, n) += 1.0;
      S(n, m) += 1.0;
      y(m) += grad(e);
      y(n) += grad(e);
    }
    const Vector z = S.llt().solve(y);
    for (auto e : free) {
      const auto m = static_cast<Eigen::Index>(edges.first(static_cast<std::size_t>(e)));
      const auto n = static_cast<Eigen::Index>(edges.second(static_cast<std::size_t>(e)));
      dir(e) = -(grad(e) - z(m) - z(n)) / p.rho;
    }
    return dir;
  }

  // Dense reduced Hessian: entry (e, f) collects beta * lambda_i over the
  // nodes i shared by edges e and f.
  const auto nf = static_cast<Eigen::Index>(free.size());
  std::vector<std::vector<Eigen::Index>> incident(p.n_nodes);
  for (Eigen::Index j = 0; j < nf; ++j) {
    const auto e = static_cast<std::size_t>(free[static_cast<std::size_t>(j)]);
    incident[edges.first(e)].push_back(j);
    incident[edges.second(e)].push_back(j);
  }
  Matrix H = Matrix::Zero(nf, nf);
  H.diagonal().setConstant(shift);
  for (std::size_t i = 0; i < p.n_nodes; ++i) {
    const double li = p.beta * lambda(static_cast<Eigen::Index>(i));
    for (auto a : incident[i]) {
      for (auto b : incident[i]) H(a, b) += li;
    }
  }
  Vector gf(nf);
  for (Eigen::Index j = 0; j < nf; ++j) gf(j) = grad(free[static_cast<std::size_t>(j)]);
  const Vector step = H.ldlt().solve(gf);
  for (Eigen::Index j = 0; j < nf; ++j) dir(free[static_cast<std::size_t>(j)]) = -step(j);
  return dir;
}

}  // namespace

double log_degree_objective(const LogDegreeProblem& p, const Vector& u) {
  if ((u.array() < 0.0).any()) return std::numeric_limits<double>::infinity();
  double value = p.linear.dot(u);
  if (p.beta > 0.0) {
    const Vector deg = degrees_of(p, u);
    if (deg.minCoeff() < kMinDegree) return std::numeric_limits<double>::infinity();
    value -= p.beta * deg.array().log().sum();
  }
  if (p.rho > 0.0) value += 0.5 * p.rho * (u - p.anchor).squaredNorm();
  return value;
}

Vector log_degree_gradient(const LogDegreeProblem& p, const Vector& u) {
  Vector grad = p.linear;
  if (p.beta > 0.0) grad -= p.beta * apply_B_adjoint(degrees_of(p, u).array().inverse().matrix());
  if (p.rho > 0.0) grad += p.rho * (u - p.anchor);
  return grad;
}

double projected_residual(const Vector& u, const Vector& grad) {
  return (u - (u - grad).cwiseMax(0.0)).norm();
}

namespace {

LogDegreeResult solve_normalized(const LogDegreeProblem& p, Vector start, double tol,
                                 int max_iters, const IterateObserver& observer) {
  const EdgeList edges(p.n_nodes);
  const auto n_edges = static_cast<Eigen::Index>(edges.size());

  Vector u = start.cwiseMax(0.0);
  if (p.beta > 0.0) {
    double bump = 1e-6;
    while (!in_domain(p, degrees_of(p, u))) {
      u.array() += bump;
      bump *= 10.0;
    }
  }

  LogDegreeResult out;
  double value = log_degree_objective(p, u);
  if (observer) observer(u, value);
  for (int it = 0;; ++it) {
    const Vector deg = degrees_of(p, u);
    const Vector grad = log_degree_gradient(p, u);
    const double res = projected_residual(u, grad);
    out.iterations = it;
    out.residual = res;
    if (res <= tol) {
      out.converged = true;
      break;
    }
    if (it >= max_iters) break;

    const double eps = std::min(kActiveCap, res);
    std::vector<char> active(static_cast<std::size_t>(n_edges), 0);
    for (Eigen::Index e = 0; e < n_edges; ++e) {
      active[static_cast<std::size_t>(e)] = (u(e) <= eps && grad(e) > 0.0) ? 1 : 0;
    }
    const Vector dir = newton_direction(p, edges, deg, grad, active, res);

    double free_slope = 0.0;
    for (Eigen::Index e = 0; e < n_edges; ++e) {
      if (!active[static_cast<std::size_t>(e)]) free_slope -= grad(e) * dir(e);
    }

    bool moved = false;
    double t = 1.0;
    for (int h = 0; h < kMaxHalvings; ++h, t *= 0.5) {
      const Vector trial = (u + t * dir).cwiseMax(0.0);
      const double trial_value = log_degree_objective(p, trial);
      if (!std::isfinite(trial_value)) continue;
      double decrease = t * free_slope;
      for (Eigen::Index e = 0; e < n_edges; ++e) {
        if (active[static_cast<std::size_t>(e)]) decrease += grad(e) * (u(e) - trial(e));
      }
      if (trial_value <= value && value - trial_value >= kArmijo * decrease) {
        u = trial;
        value = trial_value;
        moved = true;
        break;
      }
      // Below the rounding level of the objective the Armijo test cannot
      // discriminate; fall back to the optimality residual as merit.
      if (std::abs(trial_value - value) <= kRoundingBand * std::max(1.0, std::abs(value)) &&
          projected_residual(trial, log_degree_gradient(p, trial)) < res) {
        u = trial;
        value = std::min(value, trial_value);
        moved = true;
        break;
      }
    }

    if (!moved) {
      // Fall back to a plain projected-gradient step.
      t = 1.0;
      for (int h = 0; h < kMaxHalvings; ++h, t *= 0.5) {
        const Vector trial = (u - t * grad).cwiseMax(0.0);
        const double trial_value = log_degree_objective(p, trial);
        if (!std::isfinite(trial_value)) continue;
        const Vector delta = trial - u;
        if (trial_value <= value + grad.dot(delta) + delta.squaredNorm() / (2.0 * t) &&
            trial_value <= value) {
          u = trial;
          value = trial_value;
          moved = true;
          break;
        }
      }
    }
    if (!moved) break;  // stagnated at machine precision
    if (observer) observer(u, value);
  }
  out.u = std::move(u);
  return out;
}

}  // namespace

LogDegreeResult solve_log_degree(const LogDegreeProblem& p, Vector start, double tol,
                                 int max_iters, const IterateObserver& observer) {
  // Without a proximal term, u -> s u only shifts the log barrier by a
  // constant, so the problem is solved in units where the linear term has
  // mean beta. The residual and tolerance refer to those units.
  const double mean_c = p.linear.size() > 0 ? p.linear.mean() : 0.0;
  if (p.rho > 0.0 || !(p.beta > 0.0) || !(mean_c > 0.0) || !std::isfinite(mean_c)) {
    return solve_normalized(p, std::move(start), tol, max_iters, observer);
  }
  const double s = p.beta / mean_c;
  LogDegreeProblem q = p;
  q.linear = s * p.linear;
  IterateObserver scaled;
  if (observer) {
    scaled = [&](const Vector& v, double) {
      const Vector u = s * v;
      observer(u, log_degree_objective(p, u));
    };
  }
  LogDegreeResult r = solve_normalized(q, start / s, tol, max_iters, scaled);
  r.u *= s;
  return r;
}

}  // namespace gfl::detail
