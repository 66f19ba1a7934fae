#pragma once

#include <Eigen/Core>
#include <vector>

#include "uavrsma/channel.hpp"
#include "uavrsma/placement.hpp"
#include "uavrsma/signal_model.hpp"
#include "uavrsma/trace.hpp"
#include "uavrsma/wmmse.hpp"

namespace uavrsma {

enum class Scheme { kRsma, kSdma, kNoma };
enum class ChannelModelKind { kLos, kRician };

const char* scheme_name(Scheme s);

// Immutable problem instance (paper section IV conventions: users on the
// ground, sigma2 = 1, equal weights, thresholds in bits/s).
struct Scenario {
  std::vector<Position3D> users;
  Eigen::VectorXd weights;
  double p_t = 100.0;
  double sigma2 = 1.0;
  double bandwidth_hz = 20e6;
  Eigen::VectorXd rate_thresholds_bps;
  PlacementBox box;
  int n_t = 2;
  ChannelModelKind channel_model = ChannelModelKind::kLos;
  RicianParams rician;
  double beta = 2.0;

  int num_users() const { return static_cast<int>(users.size()); }
  Position3D baseline_position() const;  // user centroid at mid altitude
  void validate() const;                 // throws on inconsistent fields
};

// Small-scale coefficients, fixed for a run; all-ones under the LoS model.
struct ChannelRealization {
  std::vector<Eigen::VectorXcd> smallscale;
};

ChannelRealization draw_channel_realization(const Scenario& scenario,
                                            const Position3D& reference,
                                            uint64_t seed);

// Full channels at UAV position q: h_k = d_k^(-beta/2) * g_k.
std::vector<ChannelVector> channels_at(const Scenario& scenario,
                                       const ChannelRealization& realization,
                                       const Position3D& q);

struct JointSolution {
  Position3D uav_position;
  Precoder precoder;
  RateSplit rate_split;
  RateReport report;
  RunTrace trace;
  // WSR after every inner WMMSE step of the winning run, concatenated across
  // outer iterations. This is the per-iteration convergence curve; the outer
  // trace is too coarse to compare scheme convergence speed.
  std::vector<double> inner_wsr;
  Scheme scheme = Scheme::kRsma;
  bool converged = false;
};

struct JointOptParams {
  double epsilon = 1e-4;      // outer WSR convergence, bits/s/Hz
  int max_outer_iterations = 30;
  PrecoderOptParams precoder;
  PlacementParams placement;
};

// Scheme-aware rate report at a given position (used for re-evaluation).
RateReport evaluate_solution(const Scenario& scenario,
                             const ChannelRealization& realization, Scheme scheme,
                             const Position3D& q, const Precoder& precoder,
                             const RateSplit& split);

// Joint placement + multiple-access alternation. The trace holds one entry
// per outer iteration (iteration 0 is the fixed-placement starting point).
JointSolution alternating_optimize(const Scenario& scenario, Scheme scheme,
                                   const JointOptParams& params, uint64_t seed);

// Fixed-placement baseline: UAV at the user centroid, mid altitude; only the
// precoder/rate-split block runs. Trace entries follow the inner iterations.
JointSolution avg_location_baseline(const Scenario& scenario, Scheme scheme,
                                    const JointOptParams& params, uint64_t seed);

}  // namespace uavrsma
