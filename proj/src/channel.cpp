#include "gfl/channel.hpp"

#include <random>
#include <stdexcept>

#include "gfl/errors.hpp"
#include "gfl/seeds.hpp"

namespace gfl {

ChannelSpec ChannelSpec::from_initial(double missing_rate, double noise_scale, const Vector& psi0,
                                      std::size_t n_clients) {
  ChannelSpec s;
  s.missing_rate = missing_rate;
  s.noise_scale = noise_scale;
  const double scale = psi0.size() > 0 ? psi0.cwiseAbs().mean() : 0.0;
  s.sigma = Vector::Constant(static_cast<Eigen::Index>(n_clients), noise_scale * scale);
  return s;
}

void ChannelSpec::validate(std::size_t n_clients) const {
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0)) {
    throw std::invalid_argument("missing_rate must lie in [0, 1]");
  }
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("noise scale must be nonnegative");
  if (sigma.size() != 0 && static_cast<std::size_t>(sigma.size()) != n_clients) {
    throw DimensionMismatch("sigma has one entry per client");
  }
  if (sigma.size() != 0 && (sigma.array() < 0.0).any()) {
    throw std::invalid_argument("sigma must be nonnegative");
  }
}

ChannelOutput apply_channel(const ParamMatrix& X, const ChannelSpec& spec, std::uint64_t seed) {
  spec.validate(static_cast<std::size_t>(X.rows()));
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution drop(spec.missing_rate);
  std::normal_distribution<double> n01(0.0, 1.0);
  ChannelOutput out{ParamMatrix(X.rows(), X.cols()), ParamMatrix(X.rows(), X.cols()), 0};
  Fingerprint fp;
  // Row-major draw order: mask then noise for each entry.
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double sd = spec.sigma.size() == 0 ? 0.0 : spec.sigma(i);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double m = drop(rng) ? 0.0 : 1.0;
      const double noise = sd * n01(rng);
      out.mask(i, j) = m;
      out.x_tilde(i, j) = m * X(i, j) + noise;
      fp.add_value(m);
      fp.add_value(noise);
    }
  }
  out.draw_hash = fp.value();
  return out;
}

}  // namespace gfl
