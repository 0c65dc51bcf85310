#include "gfl/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gfl/errors.hpp"
#include "gfl/seeds.hpp"

namespace gfl {
namespace {

constexpr double kTrainFraction = 0.75;

std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t k, double kappa) {
  std::gamma_distribution<double> gamma(kappa, 1.0);
  std::vector<double> p(k);
  double sum = 0.0;
  // Tiny kappa can underflow every draw; redraw in that case.
  while (!(sum > 0.0)) {
    sum = 0.0;
    for (auto& x : p) sum += (x = gamma(rng));
  }
  for (auto& x : p) x /= sum;
  return p;
}

std::vector<std::vector<std::size_t>> assign_once(const std::vector<int>& labels, int n_classes,
                                                  std::size_t k, double kappa,
                                                  std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::vector<std::vector<std::size_t>> owned(k);
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto p = dirichlet(rng, k, kappa);
    std::vector<std::size_t> counts(k);
    std::size_t used = 0;
    for (std::size_t c = 0; c < k; ++c) {
      counts[c] = static_cast<std::size_t>(std::floor(p[c] * static_cast<double>(rows.size())));
      used += counts[c];
    }
    const auto largest = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    counts[largest] += rows.size() - used;
    std::size_t at = 0;
    for (std::size_t c = 0; c < k; ++c) {
      owned[c].insert(owned[c].end(), rows.begin() + static_cast<std::ptrdiff_t>(at),
                      rows.begin() + static_cast<std::ptrdiff_t>(at + counts[c]));
      at += counts[c];
    }
  }
  for (auto& rows : owned) std::sort(rows.begin(), rows.end());
  return owned;
}

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError(path + ": truncated IDX header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

}  // namespace

Dataset make_gaussian_mixture(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n_classes < 2 || spec.n_features < 1 || spec.n_samples < 1) {
    throw std::invalid_argument("synthetic data needs >= 2 classes, >= 1 feature, >= 1 sample");
  }
  std::mt19937_64 rng = make_engine(seed, Stream::data);
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix means(spec.n_classes, spec.n_features);
  for (Eigen::Index q = 0; q < means.rows(); ++q)
    for (Eigen::Index j = 0; j < means.cols(); ++j) means(q, j) = spec.class_separation * n01(rng);

  Dataset d;
  d.n_classes = spec.n_classes;
  d.features.resize(static_cast<Eigen::Index>(spec.n_samples), spec.n_features);
  d.labels.resize(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    const int q = static_cast<int>(i % static_cast<std::size_t>(spec.n_classes));
    d.labels[i] = q;
    for (int j = 0; j < spec.n_features; ++j) {
      d.features(static_cast<Eigen::Index>(i), j) = means(q, j) + spec.within_std * n01(rng);
    }
  }
  return d;
}

std::vector<std::vector<std::size_t>> dirichlet_assignment(const std::vector<int>& labels,
                                                           int n_classes, std::size_t k,
                                                           double kappa, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("need at least one client");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::mt19937_64 rng = make_engine(seed, Stream::partition, static_cast<std::uint64_t>(attempt));
    auto owned = assign_once(labels, n_classes, k, kappa, rng);
    const auto empty = std::find_if(owned.begin(), owned.end(), [](const auto& r) { return r.empty(); });
    if (empty == owned.end()) return owned;
    if (attempt == 1) throw EmptyClient(static_cast<std::size_t>(empty - owned.begin()));
  }
  return {};  // unreachable
}

std::vector<LocalDataset> partition_dirichlet(const Dataset& data, std::size_t k, double kappa,
                                              std::uint64_t seed) {
  const auto owned = dirichlet_assignment(data.labels, data.n_classes, k, kappa, seed);
  std::vector<LocalDataset> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& rows = owned[c];
    LocalDataset& ld = out[c];
    ld.n_classes = data.n_classes;
    ld.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
    ld.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ld.features.row(static_cast<Eigen::Index>(i)) = data.features.row(static_cast<Eigen::Index>(rows[i]));
      ld.labels[i] = data.labels[rows[i]];
    }
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng = make_engine(seed, Stream::split, c);
    std::shuffle(order.begin(), order.end(), rng);
    // At least one training row; a test set only if there is room for it.
    auto n_train = static_cast<std::size_t>(std::ceil(kTrainFraction * static_cast<double>(rows.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, rows.size());
    ld.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    ld.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(ld.train.begin(), ld.train.end());
    std::sort(ld.test.begin(), ld.test.end());
  }
  return out;
}

void permute_labels(LocalDataset& data, const std::vector<int>& permutation) {
  if (permutation.size() != static_cast<std::size_t>(data.n_classes)) {
    throw DimensionMismatch("label permutation has the wrong length");
  }
  for (auto& y : data.labels) y = permutation[static_cast<std::size_t>(y)];
}

Matrix read_idx_images(const std::string& path, std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  if (read_be32(in, path) != 0x00000803) throw IoError(path + ": not an IDX image file");
  std::size_t n = read_be32(in, path);
  const std::size_t rows = read_be32(in, path);
  const std::size_t cols = read_be32(in, path);
  if (limit > 0) n = std::min(n, limit);
  std::vector<unsigned char> buf(rows * cols);
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows * cols));
  for (std::size_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
      throw IoError(path + ": truncated image data");
    }
    for (std::size_t j = 0; j < buf.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[j] / 255.0;
    }
  }
  return out;
}

std::vector<int> read_idx_labels(const std::string& path, std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  if (read_be32(in, path) != 0x00000801) throw IoError(path + ": not an IDX label file");
  std::size_t n = read_be32(in, path);
  if (limit > 0) n = std::min(n, limit);
  std::vector<unsigned char> buf(n);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n))) {
    throw IoError(path + ": truncated label data");
  }
  return {buf.begin(), buf.end()};
}

}  // namespace gfl
