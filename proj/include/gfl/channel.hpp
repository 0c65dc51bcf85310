#pragma once

// Uplink degradation: entries are dropped with probability missing_rate
// (the server learns which ones) and Gaussian noise is added per client.

#include <cstdint>

#include "gfl/graph.hpp"

namespace gfl {

struct ChannelSpec {
  double missing_rate = 0.0;
  double noise_scale = 0.0;  // s
  Vector sigma;              // per-client noise std; empty means no noise

  /// sigma_k = s * mean |psi0| for every client.
  static ChannelSpec from_initial(double missing_rate, double noise_scale, const Vector& psi0,
                                  std::size_t n_clients);
  void validate(std::size_t n_clients) const;
};

struct ChannelOutput {
  ParamMatrix x_tilde;
  ParamMatrix mask;
  std::uint64_t draw_hash = 0;  // fingerprint of the mask and noise draws
};

/// X~ = M o X + N with M_ij ~ Bernoulli(1 - missing_rate), N_k ~ N(0, sigma_k^2 I).
/// The draws depend only on the seed and the shape of X.
ChannelOutput apply_channel(const ParamMatrix& X, const ChannelSpec& spec, std::uint64_t seed);

}  // namespace gfl
