#include "gfl/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gfl/errors.hpp"

namespace gfl {
namespace {

using MatrixMap = Eigen::Map<const Matrix>;

void check(const SoftmaxModel& m, const Vector& theta, const Matrix& features) {
  if (theta.size() != m.n_params()) throw DimensionMismatch("parameter vector has the wrong length");
  if (features.cols() != m.n_features) throw DimensionMismatch("feature width differs from the model");
}

// Logits for one row.
Vector logits(const SoftmaxModel& m, const Vector& theta, const Matrix& features, std::size_t r) {
  const MatrixMap W(theta.data(), m.n_classes, m.n_features);
  return W * features.row(static_cast<Eigen::Index>(r)).transpose() + theta.tail(m.n_classes);
}

double log_sum_exp(const Vector& z) {
  const double top = z.maxCoeff();
  return top + std::log((z.array() - top).exp().sum());
}

}  // namespace

LossGrad loss_and_grad(const SoftmaxModel& m, const Vector& theta, const Matrix& features,
                       const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
  check(m, theta, features);
  if (rows.empty()) throw std::invalid_argument("loss_and_grad needs a nonempty batch");
  LossGrad out{0.0, Vector::Zero(m.n_params())};
  Eigen::Map<Matrix> gW(out.grad.data(), m.n_classes, m.n_features);
  for (auto r : rows) {
    const Vector z = logits(m, theta, features, r);
    const double lse = log_sum_exp(z);
    const int y = labels[r];
    out.loss += lse - z(y);
    Vector p = (z.array() - lse).exp();
    p(y) -= 1.0;
    gW += p * features.row(static_cast<Eigen::Index>(r));
    out.grad.tail(m.n_classes) += p;
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  out.loss *= inv;
  out.grad *= inv;
  return out;
}

double loss(const SoftmaxModel& m, const Vector& theta, const Matrix& features,
            const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
  check(m, theta, features);
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (auto r : rows) {
    const Vector z = logits(m, theta, features, r);
    s += log_sum_exp(z) - z(labels[r]);
  }
  return s / static_cast<double>(rows.size());
}

double accuracy(const SoftmaxModel& m, const Vector& theta, const Matrix& features,
                const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
  check(m, theta, features);
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t hits = 0;
  for (auto r : rows) {
    Eigen::Index best = 0;
    logits(m, theta, features, r).maxCoeff(&best);
    hits += (best == labels[r]) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

Vector local_update(const SoftmaxModel& m, const Vector& x_global, const LocalDataset& data,
                    const LocalUpdateParams& p, std::uint64_t seed) {
  if (p.epochs < 1 || !(p.eta > 0.0) || !(p.mu >= 0.0)) {
    throw std::invalid_argument("local update needs epochs >= 1, eta > 0, mu >= 0");
  }
  Vector x = x_global;
  if (data.train.empty()) return x;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order = data.train;
  const std::size_t batch = p.batch_size == 0 ? order.size() : std::min(p.batch_size, order.size());
  const double shrink = 1.0 / (1.0 + p.eta * p.mu);
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    if (batch < order.size()) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t at = 0; at < order.size(); at += batch) {
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(at),
                                          order.begin() + static_cast<std::ptrdiff_t>(std::min(at + batch, order.size())));
      const Vector g = loss_and_grad(m, x, data.features, data.labels, rows).grad;
      x = shrink * (x - p.eta * g + (p.eta * p.mu) * x_global);
    }
  }
  return x;
}

}  // namespace gfl
