#pragma once

// Multinomial linear classifier. A parameter vector of length p*Q + Q holds
// the Q x p weight matrix (column-major) followed by the Q biases.

#include <cstdint>
#include <vector>

#include "gfl/data.hpp"
#include "gfl/graph.hpp"

namespace gfl {

struct SoftmaxModel {
  int n_features = 0;
  int n_classes = 0;

  Eigen::Index n_params() const noexcept {
    return static_cast<Eigen::Index>(n_features) * n_classes + n_classes;
  }
};

struct LossGrad {
  double loss = 0.0;  // mean cross-entropy over the batch
  Vector grad;
};

/// Mean cross-entropy on rows `rows` of the data and its exact gradient.
/// Throws std::invalid_argument on an empty batch.
LossGrad loss_and_grad(const SoftmaxModel& m, const Vector& theta, const Matrix& features,
                       const std::vector<int>& labels, const std::vector<std::size_t>& rows);

double loss(const SoftmaxModel& m, const Vector& theta, const Matrix& features,
            const std::vector<int>& labels, const std::vector<std::size_t>& rows);

/// Fraction of rows classified correctly; NaN for an empty row set.
double accuracy(const SoftmaxModel& m, const Vector& theta, const Matrix& features,
                const std::vector<int>& labels, const std::vector<std::size_t>& rows);

struct LocalUpdateParams {
  int epochs = 5;
  double eta = 0.01;
  double mu = 1.0;       // proximal weight towards the received model
  std::size_t batch_size = 32;  // 0 means full batch
};

/// Minibatch proximal SGD on f_k(x) + (mu/2)||x - x_global||^2 from
/// x_global, over the training rows. The proximal term is applied in closed
/// form per step,
///
///   x <- (x - eta grad f_k(x) + eta mu x_global) / (1 + eta mu),
///
/// which is stable for any eta * mu. Batches reshuffle every epoch using a
/// generator seeded with `seed`.
Vector local_update(const SoftmaxModel& m, const Vector& x_global, const LocalDataset& data,
                    const LocalUpdateParams& p, std::uint64_t seed);

}  // namespace gfl
