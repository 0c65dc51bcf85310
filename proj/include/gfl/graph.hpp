#pragma once

// Graph primitives over K clients.
//
// Conventions used everywhere in the library:
//   * vec(.) is column-major: entry (m, n) of a K x K matrix sits at n*K + m.
//   * upper(.) lists the strictly upper pairs row by row:
//       (0,1), (0,2), ..., (0,K-1), (1,2), ..., (K-2,K-1).
//   * The distance operator is D(X)_mn = ||x_m - x_n||^2 (rows of X).
//
// With these conventions tr(W D(X)) = 2 * tr(X^T L X) = 2 * w^T upper(D(X)).

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gfl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Stacked client parameters, one client per row (K x d).
using ParamMatrix = Eigen::MatrixXd;

/// Number of unordered pairs among n nodes.
constexpr std::size_t edge_count(std::size_t n) noexcept { return n * (n - 1) / 2; }

/// Position of pair (m, n), m < n, in the upper-triangular ordering.
constexpr std::size_t edge_index(std::size_t n_nodes, std::size_t m, std::size_t n) noexcept {
  return m * n_nodes - m * (m + 1) / 2 + (n - m - 1);
}

/// Endpoints (m, n) of every edge, in upper-triangular order.
class EdgeList {
 public:
  explicit EdgeList(std::size_t n_nodes);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t size() const noexcept { return first_.size(); }
  std::size_t first(std::size_t e) const { return first_[e]; }
  std::size_t second(std::size_t e) const { return second_[e]; }

 private:
  std::size_t n_nodes_;
  std::vector<std::size_t> first_;
  std::vector<std::size_t> second_;
};

/// Symmetric nonnegative adjacency with zero diagonal, stored as its
/// upper-triangular half.
class GraphWeights {
 public:
  /// Throws std::invalid_argument on length mismatch or negative entries.
  GraphWeights(std::size_t n_nodes, Vector w);

  static GraphWeights zeros(std::size_t n_nodes);
  /// Reads the strict upper triangle of a dense matrix (lower half ignored).
  static GraphWeights from_dense(const Matrix& W);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  const Vector& weights() const noexcept { return w_; }
  double weight(std::size_t m, std::size_t n) const;

  Matrix dense() const;
  Vector degrees() const;

 private:
  std::size_t n_nodes_;
  Vector w_;
};

/// Nonnegative per-client weights summing to one (zeta, Z = diag(zeta)).
class ClientWeights {
 public:
  explicit ClientWeights(Vector zeta);

  static ClientWeights uniform(std::size_t k);
  /// zeta_k = n_k / sum_j n_j.
  static ClientWeights from_counts(const std::vector<std::size_t>& counts);

  std::size_t size() const noexcept { return static_cast<std::size_t>(zeta_.size()); }
  const Vector& values() const noexcept { return zeta_; }
  double operator[](std::size_t k) const { return zeta_(static_cast<Eigen::Index>(k)); }

 private:
  Vector zeta_;
};

/// L = D - W.
Matrix build_laplacian(const GraphWeights& g);

/// D^{-1/2} L D^{-1/2}. Throws IsolatedNode on a zero degree.
Matrix normalized_laplacian(const GraphWeights& g);

/// tr(X^T L X).
double quadratic_form(const Matrix& L, const ParamMatrix& X);

/// Pairwise squared Euclidean distances between rows of X.
Matrix distance_matrix(const ParamMatrix& X);

/// Adjoint of distance_matrix w.r.t. the trace inner product:
/// diag(H 1) + diag(H^T 1) - 2H.
Matrix distance_adjoint(const Matrix& H);

/// Selector T: column-major vec of a K x K matrix -> upper-triangular half.
Vector apply_T(const Vector& vec_of_matrix);
/// T^T: scatters a half-vector into the upper positions of a K*K vec.
Vector apply_T_adjoint(const Vector& w, std::size_t n_nodes);

/// upper(.) directly on a square matrix (same as apply_T of its vec).
Vector upper(const Matrix& A);
/// Upper-only matrix with the half-vector scattered into (m < n) positions.
Matrix scatter_upper(const Vector& w, std::size_t n_nodes);

/// B: edge weights -> node degrees.
Vector apply_B(const Vector& w, std::size_t n_nodes);
/// B^T: node values y -> per-edge y_m + y_n.
Vector apply_B_adjoint(const Vector& y);

/// Number of nodes K with K(K-1)/2 == len; throws DimensionMismatch if none.
std::size_t nodes_for_edge_count(std::size_t len);

/// Laplacian of edge weights r applied to X, (L_r X), computed pairwise.
ParamMatrix laplacian_apply(const Vector& r, const ParamMatrix& X);

}  // namespace gfl
