#pragma once

#include <Eigen/Core>
#include <complex>
#include <optional>
#include <vector>

#include "uavrsma/qcqp.hpp"
#include "uavrsma/signal_model.hpp"
#include "uavrsma/trace.hpp"

namespace uavrsma {

// Precoder/rate-split subproblem at a fixed UAV location.
struct PrecoderProblem {
  std::vector<ChannelVector> channels;
  Eigen::VectorXd weights;
  double p_t = 1.0;
  double sigma2 = 1.0;
  Eigen::VectorXd rate_thresholds;  // bits/s/Hz (already divided by B)
};

enum class InitStrategy { kMatchedFilterSplit, kRandomSeeded };

struct PrecoderOptParams {
  double epsilon = 1e-4;  // WSR convergence threshold, bits/s/Hz
  int max_outer_iterations = 150;
  InitStrategy init_strategy = InitStrategy::kMatchedFilterSplit;
  uint64_t seed = 0;  // used by kRandomSeeded only
};

struct WmmseState {
  Eigen::VectorXcd e_common;   // e_k^0
  Eigen::VectorXcd e_private;  // e_k^k
  Eigen::VectorXd u_common;    // u_k^0 > 0
  Eigen::VectorXd u_private;   // u_k^k > 0
  Eigen::VectorXd v;           // common-rate transform, v = -r <= 0
  Precoder precoder;
};

enum class StreamKind { kCommon, kPrivate };

// T_k^0 (all streams + noise) and T_k^k (post-SIC: common removed).
std::pair<double, double> received_powers(const ChannelVector& h,
                                          const Precoder& precoder, double sigma2);

// Closed-form MMSE equalizers (e_k^0, e_k^k) for user h.user_index.
std::pair<std::complex<double>, std::complex<double>> mmse_equalizers(
    const ChannelVector& h, const Precoder& precoder, double sigma2);

// eps = |e|^2 T - 2 Re(e h^H p) + 1 for the given stream of user h.user_index.
double mse(const ChannelVector& h, const Precoder& precoder,
           std::complex<double> equalizer, StreamKind stream, double sigma2);

// zeta = u * eps - log2(u), u > 0.
double awmse(double mse_value, double weight);

// u* = 1 / eps^MMSE elementwise. Throws on nonpositive MSE.
Eigen::VectorXd optimal_weights(const Eigen::VectorXd& mmse_values);

struct P5Solution {
  Precoder precoder;
  Eigen::VectorXd v;
  SolveStatus status = SolveStatus::kOptimal;
};

// Solves the convex P5 block for fixed equalizers/weights.
P5Solution solve_p5_given_ue(const PrecoderProblem& problem,
                             const WmmseState& state);

struct PrecoderOptResult {
  Precoder precoder;
  RateSplit split;
  RateReport report;
  RunTrace trace;
  bool converged = false;
};

// Converged results of every cold start, in start order (matched filter or
// balanced first, then the single-user corner starts). The AO is a local
// method; callers that alternate with placement can explore more than the
// best fixed-position candidate.
struct PrecoderCandidates {
  std::vector<PrecoderOptResult> results;
  std::vector<bool> corner;  // true for single-user concentration starts
};

PrecoderCandidates rsma_cold_candidates(const PrecoderProblem& problem,
                                        const PrecoderOptParams& params);
PrecoderCandidates sdma_cold_candidates(const PrecoderProblem& problem,
                                        const PrecoderOptParams& params);
PrecoderCandidates noma_cold_candidates(const PrecoderProblem& problem,
                                        const PrecoderOptParams& params);

// Index of the best candidate (ties keep the earlier start so that exactly
// balanced instances stay balanced instead of drifting on solver noise).
int best_candidate(const PrecoderCandidates& candidates);

// Alternating WMMSE optimization of the RSMA precoder and rate split.
// If warm_start is given it overrides the init strategy.
PrecoderOptResult optimize_rsma(const PrecoderProblem& problem,
                                const PrecoderOptParams& params,
                                const PrecoderOptResult* warm_start = nullptr);

// SDMA baseline: RSMA with the common stream disabled (p_0 = 0, r = 0).
PrecoderOptResult sdma_optimize(const PrecoderProblem& problem,
                                const PrecoderOptParams& params,
                                const PrecoderOptResult* warm_start = nullptr);

// NOMA (SC-SIC) baseline: one superposition chain, decoding order by
// descending channel strength (weakest user's message decoded first by all).
PrecoderOptResult noma_optimize(const PrecoderProblem& problem,
                                const PrecoderOptParams& params,
                                const PrecoderOptResult* warm_start = nullptr);

// SIC decoding order: user indices sorted by ascending ||h_k|| (decoded first
// to last). Ties break on user index for determinism.
std::vector<int> noma_decoding_order(const std::vector<ChannelVector>& channels);

// True per-user rates of the SC-SIC chain for a NOMA precoder (column k+1
// carries user k's message beam; column 0 is unused and must be zero).
Eigen::VectorXd noma_user_rates(const std::vector<ChannelVector>& channels,
                                const Precoder& precoder, double sigma2);

}  // namespace uavrsma
