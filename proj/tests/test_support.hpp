#pragma once

// Shared helpers for the test binaries: seeded random instances and
// independent oracles (brute-force sums, finite differences, coordinate
// descent). Nothing here calls into the solver paths being checked.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gfl/graph.hpp"
#include "gfl/jgesr.hpp"

namespace gfl::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                            double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = n(rng);
  return M;
}

inline Vector random_weights(std::mt19937_64& rng, std::size_t k, double lo = 0.0,
                             double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector w(static_cast<Eigen::Index>(edge_count(k)));
  for (Eigen::Index e = 0; e < w.size(); ++e) w(e) = u(rng);
  return w;
}

/// Dense symmetric adjacency from the half-vector, built with explicit loops.
inline Matrix dense_from_upper(const Vector& w, std::size_t k) {
  Matrix W = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  Eigen::Index e = 0;
  for (Eigen::Index m = 0; m < W.rows(); ++m)
    for (Eigen::Index n = m + 1; n < W.cols(); ++n, ++e) W(m, n) = W(n, m) = w(e);
  return W;
}

/// sum_{m<n} W_mn ||x_m - x_n||^2 by brute force.
inline double pair_sum(const Matrix& W, const Matrix& X) {
  double s = 0.0;
  for (Eigen::Index m = 0; m < X.rows(); ++m)
    for (Eigen::Index n = m + 1; n < X.rows(); ++n) {
      double d = 0.0;
      for (Eigen::Index j = 0; j < X.cols(); ++j) d += (X(m, j) - X(n, j)) * (X(m, j) - X(n, j));
      s += W(m, n) * d;
    }
  return s;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Central-difference gradient of a scalar function of a matrix.
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                          double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  Matrix xp = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double orig = xp(i, j);
      xp(i, j) = orig + h;
      const double fp = f(xp);
      xp(i, j) = orig - h;
      const double fm = f(xp);
      xp(i, j) = orig;
      g(i, j) = (fp - fm) / (2.0 * h);
    }
  return g;
}

/// Relative error of a gradient against a reference, normalized by the
/// larger of the two norms (floored at 1e-8 to avoid dividing by zero).
inline double grad_rel_err(const Matrix& g, const Matrix& ref) {
  const double denom = std::max({g.norm(), ref.norm(), 1e-8});
  return (g - ref).norm() / denom;
}

/// Exact coordinate descent for
///   min_{u >= 0} -beta sum_i log((Bu)_i) + c^T u + (rho/2)||u - v||^2.
/// Each coordinate is minimized exactly by bisection on its (monotone)
/// derivative. Slow but independent of the projected-Newton path.
inline Vector coordinate_descent_oracle(std::size_t k, const Vector& c, double beta, double rho,
                                        const Vector& v, Vector u, int sweeps) {
  const auto m = static_cast<Eigen::Index>(edge_count(k));
  std::vector<std::pair<std::size_t, std::size_t>> ends;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) ends.emplace_back(i, j);
  Vector deg = Vector::Zero(static_cast<Eigen::Index>(k));
  for (Eigen::Index e = 0; e < m; ++e) {
    deg(static_cast<Eigen::Index>(ends[e].first)) += u(e);
    deg(static_cast<Eigen::Index>(ends[e].second)) += u(e);
  }
  for (int s = 0; s < sweeps; ++s) {
    double moved = 0.0;
    for (Eigen::Index e = 0; e < m; ++e) {
      const auto a_idx = static_cast<Eigen::Index>(ends[e].first);
      const auto b_idx = static_cast<Eigen::Index>(ends[e].second);
      const double a = deg(a_idx) - u(e);
      const double b = deg(b_idx) - u(e);
      const double ve = rho > 0.0 ? v(e) : 0.0;
      auto dphi = [&](double x) {
        double d = c(e) + rho * (x - ve);
        if (beta > 0.0) d -= beta / (a + x) + beta / (b + x);
        return d;
      };
      double lo = 0.0;
      double x;
      if ((a > 0.0 && b > 0.0 && dphi(0.0) >= 0.0) || (beta == 0.0 && dphi(0.0) >= 0.0)) {
        x = 0.0;
      } else {
        double hi = std::max(1.0, std::abs(u(e)) * 2.0 + 1.0);
        while (dphi(hi) < 0.0) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          if (beta > 0.0 && (a + mid <= 0.0 || b + mid <= 0.0)) {
            lo = mid;
            continue;
          }
          (dphi(mid) < 0.0 ? lo : hi) = mid;
        }
        x = 0.5 * (lo + hi);
      }
      moved = std::max(moved, std::abs(x - u(e)));
      deg(a_idx) += x - u(e);
      deg(b_idx) += x - u(e);
      u(e) = x;
    }
    if (moved < 1e-15) break;
  }
  return u;
}

inline double log_degree_value(std::size_t k, const Vector& c, double beta, double rho,
                               const Vector& v, const Vector& u) {
  const Matrix W = dense_from_upper(u, k);
  const Vector deg = W.rowwise().sum();
  double val = c.dot(u);
  if (beta > 0.0) val -= beta * deg.array().log().sum();
  if (rho > 0.0) val += 0.5 * rho * (u - v).squaredNorm();
  return val;
}

/// Random masked observation with client weights drawn from counts.
inline Observation random_observation(std::mt19937_64& rng, Eigen::Index k, Eigen::Index d,
                                      double missing = 0.2) {
  std::bernoulli_distribution drop(missing);
  std::uniform_int_distribution<std::size_t> count(5, 50);
  ParamMatrix mask(k, d);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < d; ++j) mask(i, j) = drop(rng) ? 0.0 : 1.0;
  std::vector<std::size_t> counts(static_cast<std::size_t>(k));
  for (auto& c : counts) c = count(rng);
  return {mask.cwiseProduct(random_matrix(rng, k, d)), mask, ClientWeights::from_counts(counts)};
}

/// f by explicit loops.
inline double brute_f(const Matrix& psi, const Vector& w, const Observation& obs,
                      const JgesrParams& p) {
  double fid = 0.0;
  for (Eigen::Index i = 0; i < psi.rows(); ++i)
    for (Eigen::Index j = 0; j < psi.cols(); ++j) {
      const double r = obs.mask(i, j) * psi(i, j) - obs.x_tilde(i, j);
      fid += obs.zeta.values()(i) * r * r;
    }
  double pen = 0.0;
  Eigen::Index e = 0;
  for (Eigen::Index m = 0; m < psi.rows(); ++m)
    for (Eigen::Index n = m + 1; n < psi.rows(); ++n, ++e) {
      const double t = w(e) + (psi.row(m) - psi.row(n)).squaredNorm();
      pen += t * t;
    }
  return 0.5 * p.mu * fid + p.alpha * pen;
}

/// h by explicit loops.
inline double brute_h(const Matrix& psi, const Vector& w, const JgesrParams& p) {
  double s = w.squaredNorm();
  for (Eigen::Index m = 0; m < psi.rows(); ++m)
    for (Eigen::Index n = m + 1; n < psi.rows(); ++n) {
      const double d = (psi.row(m) - psi.row(n)).squaredNorm();
      s += d * d;
    }
  return p.alpha * s;
}

}  // namespace gfl::testing
