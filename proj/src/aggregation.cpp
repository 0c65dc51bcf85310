#include "gfl/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gfl/errors.hpp"
#include "gfl/jgesr.hpp"

namespace gfl {
namespace {

void check_rows(const ParamMatrix& X, std::size_t k, const char* what) {
  if (static_cast<std::size_t>(X.rows()) != k) {
    throw DimensionMismatch(std::string(what) + ": X has " + std::to_string(X.rows()) +
                            " rows, expected " + std::to_string(k));
  }
}

// Solves an SPD-or-singular K x K system for several right-hand sides.
Matrix solve_system(const Matrix& A, const Matrix& rhs) {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  Eigen::FullPivLU<Matrix> lu(A);
  if (!lu.isInvertible()) throw SingularSystem("aggregation system matrix is singular");
  return lu.solve(rhs);
}

std::vector<std::size_t> components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : edges) {
    const auto ra = find(a);
    const auto rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  // Relabel roots in order of first appearance.
  std::vector<std::size_t> label(n);
  std::vector<std::size_t> root_label(n, n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    if (root_label[r] == n) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

}  // namespace

void AggregationParams::validate() const {
  if (!(mu > 0.0) || !(alpha >= 0.0)) {
    throw std::invalid_argument("aggregation needs mu > 0 and alpha >= 0");
  }
}

Clustering::Clustering(std::vector<std::size_t> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw std::invalid_argument("clustering is empty");
  n_clusters_ = *std::max_element(labels_.begin(), labels_.end()) + 1;
  std::vector<char> seen(n_clusters_, 0);
  for (auto l : labels_) seen[l] = 1;
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("cluster labels must be contiguous from 0");
  }
}

ParamMatrix aggregate_mean(const ParamMatrix& X, const ClientWeights& zeta) {
  check_rows(X, zeta.size(), "aggregate_mean");
  const Eigen::RowVectorXd mean = zeta.values().transpose() * X;
  return mean.replicate(X.rows(), 1);
}

ParamMatrix aggregate_smooth(const ParamMatrix& X, const GraphWeights& g,
                             const ClientWeights& zeta, const AggregationParams& p) {
  p.validate();
  check_rows(X, g.n_nodes(), "aggregate_smooth");
  check_rows(X, zeta.size(), "aggregate_smooth");
  const Matrix Z = zeta.values().asDiagonal();
  const Matrix A = Z + (2.0 * p.alpha / p.mu) * build_laplacian(g);
  const Matrix rhs = Z * X;
  Matrix psi = solve_system(A, rhs);
  // Normwise backward error; for large alpha/mu the plain relative residual
  // is bounded below by roughly cond(A) * machine epsilon.
  const double scale = std::max(A.norm() * psi.norm() + rhs.norm(), 1e-300);
  if (!psi.allFinite() || (A * psi - rhs).norm() > 1e-8 * scale) {
    throw SingularSystem("aggregate_smooth: solve residual too large");
  }
  return psi;
}

ParamMatrix aggregate_clusterwise(const ParamMatrix& X, const Clustering& c) {
  check_rows(X, c.size(), "aggregate_clusterwise");
  Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(c.n_clusters()), X.cols());
  std::vector<double> counts(c.n_clusters(), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    sums.row(static_cast<Eigen::Index>(c.label(k))) += X.row(static_cast<Eigen::Index>(k));
    counts[c.label(k)] += 1.0;
  }
  ParamMatrix out(X.rows(), X.cols());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto l = c.label(k);
    out.row(static_cast<Eigen::Index>(k)) = sums.row(static_cast<Eigen::Index>(l)) / counts[l];
  }
  return out;
}

ParamMatrix aggregate_adjacency(const ParamMatrix& X, const GraphWeights& g) {
  check_rows(X, g.n_nodes(), "aggregate_adjacency");
  const Vector deg = g.degrees();
  Vector inv_sqrt(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i) {
    if (!(deg(i) > 0.0)) throw IsolatedNode(static_cast<std::size_t>(i));
    inv_sqrt(i) = 1.0 / std::sqrt(deg(i));
  }
  return inv_sqrt.asDiagonal() * (g.dense() * (inv_sqrt.asDiagonal() * X));
}

Clustering clustering_from_graph(const GraphWeights& g) {
  const Vector& w = g.weights();
  const std::size_t k = g.n_nodes();
  std::vector<std::pair<std::size_t, std::size_t>> kept;
  if (w.size() > 0) {
    const double tau = w.mean();
    const EdgeList edges(k);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double we = w(static_cast<Eigen::Index>(e));
      if (we > 0.0 && we >= tau) kept.emplace_back(edges.first(e), edges.second(e));
    }
  }
  return Clustering(components(k, kept));
}

ParamMatrix restore_masked(const ParamMatrix& x_tilde, const ParamMatrix& mask,
                           const GraphWeights& g, const ClientWeights& zeta, double mu,
                           double alpha) {
  check_rows(x_tilde, g.n_nodes(), "restore_masked");
  check_rows(x_tilde, zeta.size(), "restore_masked");
  if (mask.rows() != x_tilde.rows() || mask.cols() != x_tilde.cols()) {
    throw DimensionMismatch("restore_masked: mask shape differs from X~");
  }
  if (!(mu > 0.0) || !(alpha >= 0.0)) {
    throw std::invalid_argument("restore_masked needs mu > 0 and alpha >= 0");
  }
  const auto k = static_cast<std::size_t>(x_tilde.rows());
  const Matrix L4 = (4.0 * alpha) * build_laplacian(g);
  const Vector& z = zeta.values();
  const ParamMatrix rhs = mu * z.asDiagonal() * mask.cwiseProduct(x_tilde);

  std::vector<std::pair<std::size_t, std::size_t>> linked;
  if (alpha > 0.0) {
    const EdgeList edges(k);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (g.weights()(static_cast<Eigen::Index>(e)) > 0.0) {
        linked.emplace_back(edges.first(e), edges.second(e));
      }
    }
  }
  const std::vector<std::size_t> comp = components(k, linked);
  const std::size_t n_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  const double pin = mu * z.maxCoeff();

  // Nodes of column j whose component has no observed, weighted entry. The
  // objective does not depend on their common value, so they are pinned to
  // the weighted mean of the observed entries of the column.
  auto unobserved = [&](Eigen::Index j) {
    std::vector<char> seen(n_comp, 0);
    for (std::size_t i = 0; i < k; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      if (mask(r, j) == 1.0 && z(r) > 0.0) seen[comp[i]] = 1;
    }
    std::vector<char> out(k, 0);
    bool any = false;
    for (std::size_t i = 0; i < k; ++i) any |= (out[i] = seen[comp[i]] ? 0 : 1) != 0;
    if (!any) out.clear();
    return out;
  };

  ParamMatrix psi(x_tilde.rows(), x_tilde.cols());
  std::vector<Eigen::Index> full;
  for (Eigen::Index j = 0; j < x_tilde.cols(); ++j) {
    const auto free_nodes = unobserved(j);
    if (free_nodes.empty() && (mask.col(j).array() == 1.0).all()) {
      full.push_back(j);
      continue;
    }
    Matrix A = L4;
    A.diagonal() += mu * z.cwiseProduct(mask.col(j));
    Vector b = rhs.col(j);
    if (!free_nodes.empty()) {
      const double weight = z.dot(mask.col(j));
      const double target = weight > 0.0 ? z.cwiseProduct(mask.col(j)).dot(x_tilde.col(j)) / weight
                                         : 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        if (!free_nodes[i]) continue;
        const auto r = static_cast<Eigen::Index>(i);
        A(r, r) += pin;
        b(r) += pin * target;
      }
    }
    psi.col(j) = solve_system(A, b);
  }
  // Fully observed columns share one factorization.
  if (!full.empty()) {
    Matrix A = L4;
    A.diagonal() += mu * z;
    Matrix cols(x_tilde.rows(), static_cast<Eigen::Index>(full.size()));
    for (std::size_t i = 0; i < full.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = rhs.col(full[i]);
    const Matrix sol = solve_system(A, cols);
    for (std::size_t i = 0; i < full.size(); ++i) psi.col(full[i]) = sol.col(static_cast<Eigen::Index>(i));
  }
  if (!psi.allFinite()) throw SingularSystem("restore_masked produced non-finite values");
  return psi;
}

TwoStepResult aggregate_two_step(const ParamMatrix& x_tilde, const ParamMatrix& mask,
                                 const ClientWeights& zeta, const GraphLearnParams& glp,
                                 const AggregationParams& ap, int outer_iters) {
  glp.validate();
  ap.validate();
  if (outer_iters < 0) throw std::invalid_argument("outer_iters must be nonnegative");
  Observation obs{x_tilde, mask, zeta};
  obs.validate();

  JgesrParams jp;
  jp.mu = ap.mu;
  jp.alpha = ap.alpha;
  jp.beta = glp.beta;
  jp.gamma = glp.gamma;

  GraphWeights graph = initial_graph(x_tilde);
  ParamMatrix psi = x_tilde;
  TwoStepResult out{psi, graph, joint_objective(psi, graph.dense(), obs, jp), 0.0};
  for (int it = 0; it < outer_iters; ++it) {
    graph = learn_graph(psi, glp);
    psi = restore_masked(x_tilde, mask, graph, zeta, ap.mu, ap.alpha);
  }
  out.objective_final = joint_objective(psi, graph.dense(), obs, jp);
  out.psi = std::move(psi);
  out.graph = std::move(graph);
  return out;
}

}  // namespace gfl
