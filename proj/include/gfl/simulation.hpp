#pragma once

// The federated loop: local proximal SGD on every client, the degraded
// uplink, a pluggable server-side aggregation, and per-client evaluation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfl/channel.hpp"
#include "gfl/data.hpp"
#include "gfl/graph.hpp"
#include "gfl/model.hpp"

namespace gfl {

enum class Aggregator { mean, smooth, clusterwise, adjacency, two_step, jgesr };

std::string to_string(Aggregator a);
/// Throws std::invalid_argument on an unknown name.
Aggregator aggregator_from_string(const std::string& name);

struct ServerParams {
  Aggregator aggregator = Aggregator::jgesr;
  double mu = 1.0;
  double alpha = 0.05;
  double beta = 1.0;
  double gamma = 1.0;
  double rho = 1.0;
  double epsilon = 1e-3;
  int max_outer = 500;
  double prox_tol = 1e-8;
  int prox_max_iters = 1000;
  int two_step_iters = 3;
};

struct DataParams {
  std::string source = "synthetic";  // or "mnist"
  SyntheticSpec synthetic;
  int task_clusters = 4;  // clients k and k + C share a labelling
  std::string mnist_images;
  std::string mnist_labels;
  std::size_t mnist_limit = 0;
};

struct FLConfig {
  std::size_t n_clients = 20;  // K
  int rounds = 30;             // R
  LocalUpdateParams local;     // E, eta, mu, batch size
  double kappa = 0.5;
  double missing_rate = 0.0;
  double noise_scale = 0.0;  // s
  double init_scale = 0.1;   // std of the shared initial parameters
  ServerParams server;
  DataParams data;
  std::vector<std::uint64_t> seeds{0};
  int threads = 1;  // client-parallel local updates; results do not depend on it

  /// Throws ConfigError.
  void validate() const;
};

struct ClientRecord {
  int round = 0;
  std::size_t client = 0;
  double accuracy = 0.0;  // NaN when the client has no test rows
  double loss = 0.0;
};

/// Everything fixed for one seed before the first round.
struct Federation {
  SoftmaxModel model;
  std::vector<LocalDataset> clients;
  ClientWeights zeta = ClientWeights::uniform(1);
  Vector psi0;
  ChannelSpec channel;
  std::uint64_t partition_hash = 0;
  std::uint64_t init_hash = 0;
};

Federation build_federation(const FLConfig& config, std::uint64_t seed);

struct RoundState {
  int round = 0;       // number of completed rounds
  ParamMatrix psi;     // row k is client k's current model
  std::vector<ClientRecord> records;
  std::uint64_t channel_hash = 0;  // running fingerprint of channel draws
  int solver_warnings = 0;         // PDCA runs that stopped at max_outer
};

/// Round 0 evaluation with every client holding psi0.
RoundState initial_state(const Federation& fed, const FLConfig& config);

/// One communication round: local updates, channel, aggregation,
/// redistribution and evaluation.
void run_round(RoundState& state, const Federation& fed, const FLConfig& config,
               std::uint64_t seed);

/// Server side of one round, exposed for tests.
ParamMatrix aggregate(const ParamMatrix& x_tilde, const ParamMatrix& mask,
                      const ClientWeights& zeta, const ServerParams& p, int* solver_warnings = nullptr);

struct SeedRun {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<ClientRecord> records;
  std::vector<double> mean_accuracy;  // per completed round, over clients with test rows
  std::uint64_t partition_hash = 0;
  std::uint64_t init_hash = 0;
  std::uint64_t channel_hash = 0;
  int solver_warnings = 0;

  /// Mean accuracy after the last completed round (NaN when none).
  double final_accuracy() const;
};

SeedRun run_seed(const FLConfig& config, std::uint64_t seed);

struct RunReport {
  std::vector<SeedRun> runs;
  double final_mean = 0.0;  // over seeds that did not fail
  double final_std = 0.0;
  std::size_t failures = 0;
};

RunReport run_experiment(const FLConfig& config);

}  // namespace gfl
