#pragma once

#include <Eigen/Core>
#include <vector>

#include "uavrsma/channel.hpp"

namespace uavrsma {

// Feasibility slack on power / common-rate constraints (interior-point scale).
inline constexpr double kFeasTol = 1e-6;

// Column 0 carries the common stream, columns 1..K the private streams.
struct Precoder {
  Eigen::MatrixXcd columns;  // N_t x (K+1)

  int num_users() const { return static_cast<int>(columns.cols()) - 1; }
  int num_antennas() const { return static_cast<int>(columns.rows()); }
  double total_power() const { return columns.squaredNorm(); }
};

// Per-user portions of the common rate (bits/s/Hz).
struct RateSplit {
  Eigen::VectorXd common_portions;  // length K, nonnegative

  double total() const { return common_portions.sum(); }
};

struct RateReport {
  Eigen::VectorXd common_rates;   // R_k^c
  Eigen::VectorXd private_rates;  // R_k^k
  Eigen::VectorXd overall_rates;  // R_k,ov = r_k + R_k^k
  double wsr = 0.0;               // sum_k w_k R_k,ov (bits/s/Hz)
};

// SINR of the common stream at user k's channel: all private streams interfere.
double common_sinr(const ChannelVector& h, const Precoder& precoder, double sigma2);

// SINR of user k's private stream, post-SIC (common stream removed).
// k is a 0-based user index.
double private_sinr(const ChannelVector& h, const Precoder& precoder, int k,
                    double sigma2);

inline double rate_from_sinr(double sinr) { return std::log2(1.0 + sinr); }

// min_k R_k^c: the largest common rate every user can still decode.
double common_rate_cap(const std::vector<ChannelVector>& channels,
                       const Precoder& precoder, double sigma2);

// Throws if the split exceeds the common-rate cap beyond kFeasTol.
RateReport rate_report(const std::vector<ChannelVector>& channels,
                       const Precoder& precoder, const RateSplit& split,
                       const Eigen::VectorXd& weights, double sigma2);

}  // namespace uavrsma
