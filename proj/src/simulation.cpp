#include "gfl/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "gfl/aggregation.hpp"
#include "gfl/errors.hpp"
#include "gfl/graph_learning.hpp"
#include "gfl/jgesr.hpp"
#include "gfl/seeds.hpp"

namespace gfl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Dataset load_data(const DataParams& d, std::uint64_t seed) {
  if (d.source == "synthetic") return make_gaussian_mixture(d.synthetic, seed);
  Dataset out;
  out.features = read_idx_images(d.mnist_images, d.mnist_limit);
  out.labels = read_idx_labels(d.mnist_labels, d.mnist_limit);
  if (static_cast<std::size_t>(out.features.rows()) != out.labels.size()) {
    throw IoError("image and label files hold different numbers of samples");
  }
  out.n_classes = 1 + *std::max_element(out.labels.begin(), out.labels.end());
  return out;
}

std::vector<int> shifted_labels(int n_classes, int shift) {
  std::vector<int> p(static_cast<std::size_t>(n_classes));
  for (int q = 0; q < n_classes; ++q) p[static_cast<std::size_t>(q)] = (q + shift) % n_classes;
  return p;
}

GraphLearnParams graph_params(const ServerParams& p) {
  GraphLearnParams g;
  g.alpha = p.alpha;
  g.beta = p.beta;
  g.gamma = p.gamma;
  return g;
}

void evaluate(RoundState& state, const Federation& fed, int round) {
  for (std::size_t k = 0; k < fed.clients.size(); ++k) {
    const LocalDataset& c = fed.clients[k];
    const Vector theta = state.psi.row(static_cast<Eigen::Index>(k)).transpose();
    state.records.push_back({round, k, accuracy(fed.model, theta, c.features, c.labels, c.test),
                             loss(fed.model, theta, c.features, c.labels, c.test)});
  }
}

}  // namespace

std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::mean: return "mean";
    case Aggregator::smooth: return "smooth";
    case Aggregator::clusterwise: return "clusterwise";
    case Aggregator::adjacency: return "adjacency";
    case Aggregator::two_step: return "two_step";
    case Aggregator::jgesr: return "jgesr";
  }
  return "unknown";
}

Aggregator aggregator_from_string(const std::string& name) {
  for (auto a : {Aggregator::mean, Aggregator::smooth, Aggregator::clusterwise,
                 Aggregator::adjacency, Aggregator::two_step, Aggregator::jgesr}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown aggregator '" + name + "'");
}

void FLConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (n_clients < 2) fail("K must be at least 2");
  if (rounds < 0) fail("R must be nonnegative");
  if (local.epochs < 1) fail("E must be at least 1");
  if (!(local.eta > 0.0)) fail("eta must be positive");
  if (!(local.mu >= 0.0)) fail("mu must be nonnegative");
  if (!(kappa > 0.0)) fail("kappa must be positive");
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0)) fail("missing_rate must lie in [0, 1]");
  if (!(noise_scale >= 0.0)) fail("noise_scale must be nonnegative");
  if (!(init_scale >= 0.0)) fail("init_scale must be nonnegative");
  if (seeds.empty()) fail("seeds must not be empty");
  if (threads < 1) fail("threads must be at least 1");
  if (data.source != "synthetic" && data.source != "mnist") fail("data.source must be synthetic or mnist");
  if (data.task_clusters < 1) fail("data.task_clusters must be at least 1");
  const ServerParams& s = server;
  if (!(s.mu > 0.0) || !(s.alpha > 0.0) || !(s.beta > 0.0) || !(s.gamma > 0.0) || !(s.rho > 0.0)) {
    fail("server mu, alpha, beta, gamma, rho must be positive");
  }
  if (!(s.epsilon > 0.0) || !(s.prox_tol > 0.0) || s.max_outer < 1 || s.prox_max_iters < 1) {
    fail("server tolerances and iteration caps must be positive");
  }
  if (s.two_step_iters < 1) fail("server.two_step_iters must be at least 1");
}

Federation build_federation(const FLConfig& config, std::uint64_t seed) {
  config.validate();
  const Dataset data = load_data(config.data, seed);
  Federation fed;
  fed.model = {static_cast<int>(data.features.cols()), data.n_classes};
  fed.clients = partition_dirichlet(data, config.n_clients, config.kappa, seed);

  std::vector<std::size_t> counts;
  Fingerprint part;
  for (std::size_t k = 0; k < fed.clients.size(); ++k) {
    LocalDataset& c = fed.clients[k];
    const int shift = static_cast<int>(k % static_cast<std::size_t>(config.data.task_clusters));
    permute_labels(c, shifted_labels(data.n_classes, shift));
    counts.push_back(c.size());
    part.add(c.features.data(), sizeof(double) * static_cast<std::size_t>(c.features.size()));
    part.add(c.labels.data(), sizeof(int) * c.labels.size());
    part.add(c.train.data(), sizeof(std::size_t) * c.train.size());
  }
  fed.partition_hash = part.value();
  fed.zeta = ClientWeights::from_counts(counts);

  std::mt19937_64 rng = make_engine(seed, Stream::init);
  std::normal_distribution<double> n(0.0, config.init_scale);
  fed.psi0.resize(fed.model.n_params());
  for (Eigen::Index i = 0; i < fed.psi0.size(); ++i) fed.psi0(i) = n(rng);
  Fingerprint init;
  init.add(fed.psi0.data(), sizeof(double) * static_cast<std::size_t>(fed.psi0.size()));
  fed.init_hash = init.value();

  fed.channel = ChannelSpec::from_initial(config.missing_rate, config.noise_scale, fed.psi0,
                                          config.n_clients);
  return fed;
}

RoundState initial_state(const Federation& fed, const FLConfig&) {
  RoundState s;
  s.psi = fed.psi0.transpose().replicate(static_cast<Eigen::Index>(fed.clients.size()), 1);
  evaluate(s, fed, 0);
  return s;
}

ParamMatrix aggregate(const ParamMatrix& x_tilde, const ParamMatrix& mask,
                      const ClientWeights& zeta, const ServerParams& p, int* solver_warnings) {
  const AggregationParams ap{p.mu, p.alpha};
  switch (p.aggregator) {
    case Aggregator::mean:
      return aggregate_mean(x_tilde, zeta);
    case Aggregator::smooth:
      return aggregate_smooth(x_tilde, learn_graph(x_tilde, graph_params(p)), zeta, ap);
    case Aggregator::clusterwise:
      return aggregate_clusterwise(x_tilde,
                                   clustering_from_graph(learn_graph(x_tilde, graph_params(p))));
    case Aggregator::adjacency:
      return aggregate_adjacency(x_tilde, learn_graph(x_tilde, graph_params(p)));
    case Aggregator::two_step:
      return aggregate_two_step(x_tilde, mask, zeta, graph_params(p), ap, p.two_step_iters).psi;
    case Aggregator::jgesr: {
      JgesrParams jp;
      jp.mu = p.mu;
      jp.alpha = p.alpha;
      jp.beta = p.beta;
      jp.gamma = p.gamma;
      jp.rho = p.rho;
      jp.epsilon = p.epsilon;
      jp.max_outer = p.max_outer;
      jp.prox_tol = p.prox_tol;
      jp.prox_max_iters = p.prox_max_iters;
      const Observation obs{x_tilde, mask, zeta};
      try {
        return pdca_solve(obs, initial_graph(x_tilde), jp).psi;
      } catch (const PdcaNoConvergence& e) {
        // The last iterate is still a descent point of the objective.
        if (solver_warnings) ++*solver_warnings;
        return e.state().psi;
      }
    }
  }
  throw std::logic_error("unhandled aggregator");
}

void run_round(RoundState& state, const Federation& fed, const FLConfig& config,
               std::uint64_t seed) {
  const std::size_t k = fed.clients.size();
  const auto r = static_cast<std::uint64_t>(state.round);
  ParamMatrix X(static_cast<Eigen::Index>(k), fed.model.n_params());

  auto train = [&](std::size_t c) {
    const Vector start = state.psi.row(static_cast<Eigen::Index>(c)).transpose();
    const Vector x = local_update(fed.model, start, fed.clients[c], config.local,
                                  derive_seed(seed, Stream::sgd, c, r));
    X.row(static_cast<Eigen::Index>(c)) = x.transpose();
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.threads), k);
  if (n_threads <= 1) {
    for (std::size_t c = 0; c < k; ++c) train(c);
  } else {
    std::vector<std::exception_ptr> errors(n_threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t c = t; c < k; c += n_threads) train(c);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  if (!X.allFinite()) throw Error("local training diverged in round " + std::to_string(r + 1));

  const ChannelOutput ch = apply_channel(X, fed.channel, derive_seed(seed, Stream::channel, r));
  Fingerprint fp;
  fp.add_value(state.channel_hash);
  fp.add_value(ch.draw_hash);
  state.channel_hash = fp.value();

  ParamMatrix psi = aggregate(ch.x_tilde, ch.mask, fed.zeta, config.server, &state.solver_warnings);
  if (!psi.allFinite()) throw Error("aggregation produced non-finite parameters");
  state.psi = std::move(psi);
  ++state.round;
  evaluate(state, fed, state.round);
}

double SeedRun::final_accuracy() const {
  return mean_accuracy.empty() ? kNaN : mean_accuracy.back();
}

SeedRun run_seed(const FLConfig& config, std::uint64_t seed) {
  SeedRun out;
  out.seed = seed;
  RoundState state;
  try {
    const Federation fed = build_federation(config, seed);
    out.partition_hash = fed.partition_hash;
    out.init_hash = fed.init_hash;
    state = initial_state(fed, config);
    for (int r = 0; r < config.rounds; ++r) run_round(state, fed, config, seed);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  out.records = std::move(state.records);
  out.channel_hash = state.channel_hash;
  out.solver_warnings = state.solver_warnings;

  // Per-round mean over clients that have test rows.
  for (std::size_t i = 0; i < out.records.size();) {
    const int round = out.records[i].round;
    double sum = 0.0;
    std::size_t n = 0;
    for (; i < out.records.size() && out.records[i].round == round; ++i) {
      if (!std::isnan(out.records[i].accuracy)) {
        sum += out.records[i].accuracy;
        ++n;
      }
    }
    out.mean_accuracy.push_back(n > 0 ? sum / static_cast<double>(n) : kNaN);
  }
  return out;
}

RunReport run_experiment(const FLConfig& config) {
  config.validate();
  RunReport rep;
  std::vector<double> finals;
  for (auto seed : config.seeds) {
    rep.runs.push_back(run_seed(config, seed));
    if (rep.runs.back().failed) {
      ++rep.failures;
    } else {
      finals.push_back(rep.runs.back().final_accuracy());
    }
  }
  if (finals.empty()) {
    rep.final_mean = rep.final_std = kNaN;
    return rep;
  }
  rep.final_mean = std::accumulate(finals.begin(), finals.end(), 0.0) / static_cast<double>(finals.size());
  double ss = 0.0;
  for (double f : finals) ss += (f - rep.final_mean) * (f - rep.final_mean);
  rep.final_std = finals.size() > 1 ? std::sqrt(ss / static_cast<double>(finals.size() - 1)) : 0.0;
  return rep;
}

}  // namespace gfl
