#pragma once

#include <Eigen/Core>
#include <random>

#include "uavrsma/geometry.hpp"

namespace uavrsma {

// Air-to-ground channel from the UAV array to one single-antenna user.
struct ChannelVector {
  Eigen::VectorXcd coefficients;  // length N_t, amplitude gain
  double distance = 0.0;          // meters
  int user_index = 0;
};

struct RicianParams {
  double a1 = std::pow(10.0, 0.5);  // K-factor at the horizon
  double b1 = std::pow(10.0, 1.5);  // exponential growth rate over elevation
  double beta = 2.0;                // path-loss exponent
};

// Free-space LoS channel: every antenna sees d^(-beta/2).
ChannelVector los_channel(const Position3D& uav, const Position3D& user,
                          double beta, int n_t, int user_index = 0);

// Elevation-dependent Rician K-factor, alpha(theta) = a1 * exp(b1 * theta).
double rician_k_factor(double theta, const RicianParams& params);

// Unit-power Rician small-scale coefficient for a given K-factor.
std::complex<double> sample_rician_fading(double k_factor, std::mt19937_64& rng);

// Per-antenna h_j = d^(-beta/2) * g_j with g_j Rician, E{|g_j|^2} = 1.
ChannelVector sample_rician_channel(const Position3D& uav, const Position3D& user,
                                    const RicianParams& params, int n_t,
                                    std::mt19937_64& rng, int user_index = 0);

}  // namespace uavrsma
