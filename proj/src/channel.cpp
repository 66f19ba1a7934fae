#include "uavrsma/channel.hpp"

#include <stdexcept>

namespace uavrsma {

ChannelVector los_channel(const Position3D& uav, const Position3D& user,
                          double beta, int n_t, int user_index) {
  if (n_t < 1) throw std::invalid_argument("los_channel: n_t must be >= 1");
  if (beta <= 0.0) throw std::invalid_argument("los_channel: beta must be > 0");
  const double d = distance(uav, user);
  const double gain = std::pow(d, -beta / 2.0);
  ChannelVector h;
  h.coefficients = Eigen::VectorXcd::Constant(n_t, std::complex<double>(gain, 0.0));
  h.distance = d;
  h.user_index = user_index;
  return h;
}

double rician_k_factor(double theta, const RicianParams& params) {
  return params.a1 * std::exp(params.b1 * theta);
}

std::complex<double> sample_rician_fading(double k_factor, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  // CN(0,1) scatter component; draw both parts even in the K -> inf limit so
  // the RNG stream advances the same way regardless of geometry.
  const double wr = n01(rng);
  const double wi = n01(rng);
  const double los = std::sqrt(k_factor / (k_factor + 1.0));
  const double nlos = std::sqrt(1.0 / (k_factor + 1.0)) * std::sqrt(0.5);
  return {los + nlos * wr, nlos * wi};
}

ChannelVector sample_rician_channel(const Position3D& uav, const Position3D& user,
                                    const RicianParams& params, int n_t,
                                    std::mt19937_64& rng, int user_index) {
  if (n_t < 1) throw std::invalid_argument("sample_rician_channel: n_t must be >= 1");
  const double d = distance(uav, user);
  const double theta = elevation_angle(uav, user);
  const double k = rician_k_factor(theta, params);
  const double gain = std::pow(d, -params.beta / 2.0);
  ChannelVector h;
  h.coefficients.resize(n_t);
  for (int j = 0; j < n_t; ++j) {
    h.coefficients(j) = gain * sample_rician_fading(k, rng);
  }
  h.distance = d;
  h.user_index = user_index;
  return h;
}

}  // namespace uavrsma
