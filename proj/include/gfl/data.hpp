#pragma once

// Classification data, its non-IID split across clients, and loaders.

#include <cstdint>
#include <string>
#include <vector>

#include "gfl/graph.hpp"

namespace gfl {

/// Labels are 0-based class indices.
struct Dataset {
  Matrix features;  // n x p
  std::vector<int> labels;
  int n_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

/// One client's data. `train` and `test` index rows of `features`; they are
/// disjoint and together cover every row.
struct LocalDataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  int n_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

struct SyntheticSpec {
  std::size_t n_samples = 4000;
  int n_features = 10;
  int n_classes = 4;
  double class_separation = 2.0;  // std of the class means
  double within_std = 1.0;
};

/// Gaussian mixture: class means ~ N(0, sep^2 I), samples ~ N(mean, std^2 I),
/// equally many samples per class (up to one).
Dataset make_gaussian_mixture(const SyntheticSpec& spec, std::uint64_t seed);

/// Splits every class over K clients with proportions ~ Dir_K(kappa). Counts
/// are floored and the remainder goes to the client with the largest
/// proportion. If some client is left empty the whole draw is repeated once
/// with a fresh stream; a second failure throws EmptyClient. Each client's
/// rows are then split 75% / 25% into train and test.
std::vector<LocalDataset> partition_dirichlet(const Dataset& data, std::size_t k, double kappa,
                                              std::uint64_t seed);

/// Rows of `data` owned by each client, before the train/test split. Exposed
/// for conservation checks and fingerprints.
std::vector<std::vector<std::size_t>> dirichlet_assignment(const std::vector<int>& labels,
                                                           int n_classes, std::size_t k,
                                                           double kappa, std::uint64_t seed);

/// Relabels client data through a permutation of the classes, so that
/// clients in different task clusters disagree on the label of a region.
void permute_labels(LocalDataset& data, const std::vector<int>& permutation);

/// Reads an IDX image file (magic 0x00000803) as an n x (rows*cols) matrix
/// scaled to [0, 1], and an IDX label file (0x00000801). Throws IoError.
Matrix read_idx_images(const std::string& path, std::size_t limit = 0);
std::vector<int> read_idx_labels(const std::string& path, std::size_t limit = 0);

}  // namespace gfl
