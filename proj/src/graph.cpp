#include "gfl/graph.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gfl/errors.hpp"

namespace gfl {

EdgeList::EdgeList(std::size_t n_nodes) : n_nodes_(n_nodes) {
  const std::size_t m = edge_count(n_nodes);
  first_.reserve(m);
  second_.reserve(m);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t j = i + 1; j < n_nodes; ++j) {
      first_.push_back(i);
      second_.push_back(j);
    }
  }
}

GraphWeights::GraphWeights(std::size_t n_nodes, Vector w) : n_nodes_(n_nodes), w_(std::move(w)) {
  if (n_nodes == 0) throw std::invalid_argument("graph needs at least one node");
  if (static_cast<std::size_t>(w_.size()) != edge_count(n_nodes)) {
    throw std::invalid_argument("edge vector has length " + std::to_string(w_.size()) +
                                ", expected " + std::to_string(edge_count(n_nodes)));
  }
  for (Eigen::Index e = 0; e < w_.size(); ++e) {
    if (!(w_(e) >= 0.0) || !std::isfinite(w_(e))) {
      throw std::invalid_argument("edge weight " + std::to_string(e) +
                                  " is negative or not finite");
    }
  }
}

GraphWeights GraphWeights::zeros(std::size_t n_nodes) {
  return GraphWeights(n_nodes, Vector::Zero(static_cast<Eigen::Index>(edge_count(n_nodes))));
}

GraphWeights GraphWeights::from_dense(const Matrix& W) {
  if (W.rows() != W.cols()) throw DimensionMismatch("adjacency must be square");
  return GraphWeights(static_cast<std::size_t>(W.rows()), upper(W));
}

double GraphWeights::weight(std::size_t m, std::size_t n) const {
  if (m == n) return 0.0;
  if (m > n) std::swap(m, n);
  return w_(static_cast<Eigen::Index>(edge_index(n_nodes_, m, n)));
}

Matrix GraphWeights::dense() const {
  Matrix W = scatter_upper(w_, n_nodes_);
  Matrix sym = W + W.transpose();
  return sym;
}

Vector GraphWeights::degrees() const { return apply_B(w_, n_nodes_); }

ClientWeights::ClientWeights(Vector zeta) : zeta_(std::move(zeta)) {
  if (zeta_.size() == 0) throw std::invalid_argument("client weights are empty");
  if ((zeta_.array() < 0.0).any() || !zeta_.allFinite()) {
    throw std::invalid_argument("client weights must be finite and nonnegative");
  }
  if (std::abs(zeta_.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("client weights must sum to one");
  }
}

ClientWeights ClientWeights::uniform(std::size_t k) {
  const auto n = static_cast<Eigen::Index>(k);
  return ClientWeights(Vector::Constant(n, 1.0 / static_cast<double>(k)));
}

ClientWeights ClientWeights::from_counts(const std::vector<std::size_t>& counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw std::invalid_argument("client sample counts are all zero");
  Vector z(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t k = 0; k < counts.size(); ++k) {
    z(static_cast<Eigen::Index>(k)) = static_cast<double>(counts[k]) / static_cast<double>(total);
  }
  // Renormalize so rounding never pushes the sum past the 1e-12 gate.
  z /= z.sum();
  return ClientWeights(std::move(z));
}

Matrix build_laplacian(const GraphWeights& g) {
  Matrix W = g.dense();
  Matrix L = -W;
  L.diagonal() = W.rowwise().sum();
  return L;
}

Matrix normalized_laplacian(const GraphWeights& g) {
  const Vector deg = g.degrees();
  Vector inv_sqrt(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i) {
    if (!(deg(i) > 0.0)) throw IsolatedNode(static_cast<std::size_t>(i));
    inv_sqrt(i) = 1.0 / std::sqrt(deg(i));
  }
  return inv_sqrt.asDiagonal() * build_laplacian(g) * inv_sqrt.asDiagonal();
}

double quadratic_form(const Matrix& L, const ParamMatrix& X) {
  if (L.rows() != L.cols() || L.cols() != X.rows()) {
    throw DimensionMismatch("Laplacian is " + std::to_string(L.rows()) + "x" +
                            std::to_string(L.cols()) + " but X has " +
                            std::to_string(X.rows()) + " rows");
  }
  return (X.transpose() * L * X).trace();
}

Matrix distance_matrix(const ParamMatrix& X) {
  const Eigen::Index k = X.rows();
  Matrix Dm = Matrix::Zero(k, k);
  for (Eigen::Index m = 0; m < k; ++m) {
    for (Eigen::Index n = m + 1; n < k; ++n) {
      const double d = (X.row(m) - X.row(n)).squaredNorm();
      Dm(m, n) = d;
      Dm(n, m) = d;
    }
  }
  return Dm;
}

Matrix distance_adjoint(const Matrix& H) {
  if (H.rows() != H.cols()) throw DimensionMismatch("distance_adjoint needs a square matrix");
  Matrix out = -2.0 * H;
  out.diagonal() += H.rowwise().sum() + H.colwise().sum().transpose();
  return out;
}

std::size_t nodes_for_edge_count(std::size_t len) {
  // K(K-1)/2 = len  =>  K = (1 + sqrt(1 + 8 len)) / 2
  const auto k = static_cast<std::size_t>(
      std::llround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(len))) / 2.0));
  if (k < 1 || edge_count(k) != len) {
    throw DimensionMismatch("length " + std::to_string(len) + " is not K(K-1)/2 for any K");
  }
  return k;
}

Vector apply_T(const Vector& vec_of_matrix) {
  const auto len = static_cast<std::size_t>(vec_of_matrix.size());
  const auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(len))));
  if (k * k != len) {
    throw DimensionMismatch("apply_T expects K^2 entries, got " + std::to_string(len));
  }
  Vector out(static_cast<Eigen::Index>(edge_count(k)));
  Eigen::Index e = 0;
  for (std::size_t m = 0; m < k; ++m) {
    for (std::size_t n = m + 1; n < k; ++n) {
      out(e++) = vec_of_matrix(static_cast<Eigen::Index>(n * k + m));
    }
  }
  return out;
}

Vector apply_T_adjoint(const Vector& w, std::size_t n_nodes) {
  if (static_cast<std::size_t>(w.size()) != edge_count(n_nodes)) {
    throw DimensionMismatch("apply_T_adjoint: half-vector length does not match K");
  }
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n_nodes * n_nodes));
  Eigen::Index e = 0;
  for (std::size_t m = 0; m < n_nodes; ++m) {
    for (std::size_t n = m + 1; n < n_nodes; ++n) {
      out(static_cast<Eigen::Index>(n * n_nodes + m)) = w(e++);
    }
  }
  return out;
}

Vector upper(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("upper() needs a square matrix");
  const auto k = static_cast<std::size_t>(A.rows());
  Vector out(static_cast<Eigen::Index>(edge_count(k)));
  Eigen::Index e = 0;
  for (Eigen::Index m = 0; m < A.rows(); ++m) {
    for (Eigen::Index n = m + 1; n < A.cols(); ++n) out(e++) = A(m, n);
  }
  return out;
}

Matrix scatter_upper(const Vector& w, std::size_t n_nodes) {
  const Vector v = apply_T_adjoint(w, n_nodes);
  const auto k = static_cast<Eigen::Index>(n_nodes);
  return Eigen::Map<const Matrix>(v.data(), k, k);
}

Vector apply_B(const Vector& w, std::size_t n_nodes) {
  if (static_cast<std::size_t>(w.size()) != edge_count(n_nodes)) {
    throw DimensionMismatch("apply_B: edge vector length does not match K");
  }
  Vector deg = Vector::Zero(static_cast<Eigen::Index>(n_nodes));
  Eigen::Index e = 0;
  for (std::size_t m = 0; m < n_nodes; ++m) {
    for (std::size_t n = m + 1; n < n_nodes; ++n, ++e) {
      deg(static_cast<Eigen::Index>(m)) += w(e);
      deg(static_cast<Eigen::Index>(n)) += w(e);
    }
  }
  return deg;
}

Vector apply_B_adjoint(const Vector& y) {
  const auto k = static_cast<std::size_t>(y.size());
  Vector out(static_cast<Eigen::Index>(edge_count(k)));
  Eigen::Index e = 0;
  for (Eigen::Index m = 0; m < y.size(); ++m) {
    for (Eigen::Index n = m + 1; n < y.size(); ++n) out(e++) = y(m) + y(n);
  }
  return out;
}

ParamMatrix laplacian_apply(const Vector& r, const ParamMatrix& X) {
  const auto k = static_cast<std::size_t>(X.rows());
  if (static_cast<std::size_t>(r.size()) != edge_count(k)) {
    throw DimensionMismatch("laplacian_apply: edge vector length does not match rows of X");
  }
  ParamMatrix out = ParamMatrix::Zero(X.rows(), X.cols());
  Eigen::Index e = 0;
  for (Eigen::Index m = 0; m < X.rows(); ++m) {
    for (Eigen::Index n = m + 1; n < X.rows(); ++n, ++e) {
      if (r(e) == 0.0) continue;
      out.row(m) += r(e) * (X.row(m) - X.row(n));
      out.row(n) += r(e) * (X.row(n) - X.row(m));
    }
  }
  return out;
}

}  // namespace gfl
