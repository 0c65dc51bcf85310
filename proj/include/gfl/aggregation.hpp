#pragma once

// Closed-form server-side aggregation rules. All of them are special cases
// (or limits) of the graph low-pass filter
//
//   Psi = argmin (mu/2) ||Psi - X||_Z^2 + alpha tr(Psi^T L Psi)
//       = (Z + (2 alpha / mu) L)^{-1} Z X.

#include <cstddef>
#include <vector>

#include "gfl/graph.hpp"
#include "gfl/graph_learning.hpp"

namespace gfl {

struct AggregationParams {
  double mu = 1.0;
  double alpha = 0.05;

  void validate() const;
};

/// Cluster label per client, 0-based and contiguous (every label in
/// [0, n_clusters) is used).
class Clustering {
 public:
  explicit Clustering(std::vector<std::size_t> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t n_clusters() const noexcept { return n_clusters_; }
  std::size_t label(std::size_t k) const { return labels_[k]; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }

 private:
  std::vector<std::size_t> labels_;
  std::size_t n_clusters_ = 0;
};

/// FedAvg: every row becomes sum_k zeta_k x_k.
ParamMatrix aggregate_mean(const ParamMatrix& X, const ClientWeights& zeta);

/// Solves (Z + (2 alpha/mu) L) Psi = Z X by a dense factorization. Throws
/// SingularSystem when the system matrix is not invertible.
ParamMatrix aggregate_smooth(const ParamMatrix& X, const GraphWeights& g,
                             const ClientWeights& zeta, const AggregationParams& p);

/// Replaces each row by the unweighted mean of its cluster.
ParamMatrix aggregate_clusterwise(const ParamMatrix& X, const Clustering& c);

/// D^{-1/2} W D^{-1/2} X. Throws IsolatedNode on a zero degree.
ParamMatrix aggregate_adjacency(const ParamMatrix& X, const GraphWeights& g);

/// Keeps edges with weight >= mean(w) (and > 0) and returns the connected
/// components as clusters.
Clustering clustering_from_graph(const GraphWeights& g);

/// Signal restoration for a fixed graph with a masked fidelity term:
///
///   argmin_Psi (mu/2) ||M o Psi - X_tilde||_Z^2 + alpha tr(W D(Psi)).
///
/// Each column j solves (mu Z diag(M_j) + 4 alpha L) psi_j = mu Z (M_j o x_j).
/// Where a connected component of the graph has no observed entry in column
/// j the minimizer is not unique; those entries are set to the zeta-weighted
/// mean of the observed entries of the column (0 if there are none).
ParamMatrix restore_masked(const ParamMatrix& x_tilde, const ParamMatrix& mask,
                           const GraphWeights& g, const ClientWeights& zeta, double mu,
                           double alpha);

struct TwoStepResult {
  ParamMatrix psi;
  GraphWeights graph;
  double objective_initial = 0.0;
  double objective_final = 0.0;
};

/// Alternating baseline: starting from Psi = X_tilde and the repaired cosine
/// graph, alternates learn_graph(Psi) and restore_masked(...) for
/// `outer_iters` rounds. Objective values use the joint objective with
/// (ap.mu, ap.alpha, glp.beta, glp.gamma); it is non-increasing when
/// ap.alpha == glp.alpha.
TwoStepResult aggregate_two_step(const ParamMatrix& x_tilde, const ParamMatrix& mask,
                                 const ClientWeights& zeta, const GraphLearnParams& glp,
                                 const AggregationParams& ap, int outer_iters);

}  // namespace gfl
