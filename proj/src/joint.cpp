#include "uavrsma/joint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavrsma {

namespace {

Eigen::VectorXd thresholds_per_hz(const Scenario& scenario) {
  return scenario.rate_thresholds_bps / scenario.bandwidth_hz;
}

PrecoderProblem make_precoder_problem(const Scenario& scenario,
                                      std::vector<ChannelVector> channels) {
  PrecoderProblem problem;
  problem.channels = std::move(channels);
  problem.weights = scenario.weights;
  problem.p_t = scenario.p_t;
  problem.sigma2 = scenario.sigma2;
  problem.rate_thresholds = thresholds_per_hz(scenario);
  return problem;
}

PrecoderOptResult run_precoder(const Scenario& scenario,
                               std::vector<ChannelVector> channels, Scheme scheme,
                               const PrecoderOptParams& params,
                               const PrecoderOptResult* warm) {
  const PrecoderProblem problem = make_precoder_problem(scenario, std::move(channels));
  switch (scheme) {
    case Scheme::kRsma: return optimize_rsma(problem, params, warm);
    case Scheme::kSdma: return sdma_optimize(problem, params, warm);
    case Scheme::kNoma: return noma_optimize(problem, params, warm);
  }
  throw std::logic_error("unknown scheme");
}

PrecoderCandidates cold_candidates(const Scenario& scenario,
                                   std::vector<ChannelVector> channels,
                                   Scheme scheme, const PrecoderOptParams& params) {
  const PrecoderProblem problem = make_precoder_problem(scenario, std::move(channels));
  switch (scheme) {
    case Scheme::kRsma: return rsma_cold_candidates(problem, params);
    case Scheme::kSdma: return sdma_cold_candidates(problem, params);
    case Scheme::kNoma: return noma_cold_candidates(problem, params);
  }
  throw std::logic_error("unknown scheme");
}

PlacementResult run_placement(const Scenario& scenario, const Position3D& q,
                              const PrecoderOptResult& state,
                              const PlacementParams& params) {
  // All schemes reuse the same placement program built on the per-user beam
  // powers; SIC gains enter only through the precoder block. A move that the
  // surrogate overrates is caught by the outer revert guard.
  return optimize_placement(q, state.precoder, state.split, scenario.users,
                            scenario.weights, thresholds_per_hz(scenario),
                            scenario.sigma2, scenario.box, params);
}

RateSplit clamp_to_cap(const std::vector<ChannelVector>& channels,
                       const Precoder& precoder, Eigen::VectorXd r, double sigma2) {
  r = r.cwiseMax(0.0);
  const double cap = common_rate_cap(channels, precoder, sigma2);
  const double total = r.sum();
  if (total > cap) r *= cap > 0.0 ? cap / total : 0.0;
  return RateSplit{std::move(r)};
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kRsma: return "rsma";
    case Scheme::kSdma: return "sdma";
    case Scheme::kNoma: return "noma";
  }
  return "?";
}

Position3D Scenario::baseline_position() const {
  Position3D c{0.0, 0.0, 0.5 * (box.z_min + box.z_max)};
  for (const auto& u : users) {
    c.x += u.x / static_cast<double>(users.size());
    c.y += u.y / static_cast<double>(users.size());
  }
  c.x = std::clamp(c.x, box.x_min, box.x_max);
  c.y = std::clamp(c.y, box.y_min, box.y_max);
  return c;
}

void Scenario::validate() const {
  if (users.empty()) throw std::invalid_argument("scenario: K must be >= 1");
  if (n_t < 1) throw std::invalid_argument("scenario: N_t must be >= 1");
  if (p_t <= 0.0) throw std::invalid_argument("scenario: P_t must be > 0");
  if (sigma2 <= 0.0) throw std::invalid_argument("scenario: sigma2 must be > 0");
  if (bandwidth_hz <= 0.0) throw std::invalid_argument("scenario: B must be > 0");
  if (weights.size() != num_users() || (weights.array() < 0.0).any()) {
    throw std::invalid_argument("scenario: weights must be K nonnegative values");
  }
  if (rate_thresholds_bps.size() != num_users()) {
    throw std::invalid_argument("scenario: need one rate threshold per user");
  }
  if (!(box.x_min < box.x_max) || !(box.y_min < box.y_max) ||
      !(box.z_min < box.z_max)) {
    throw std::invalid_argument("scenario: placement box is empty");
  }
  if (box.z_min <= 0.0) throw std::invalid_argument("scenario: z_min must be > 0");
  for (const auto& u : users) {
    if (u.z < 0.0) throw std::invalid_argument("scenario: user altitude below ground");
  }
}

ChannelRealization draw_channel_realization(const Scenario& scenario,
                                            const Position3D& reference,
                                            uint64_t seed) {
  ChannelRealization real;
  real.smallscale.resize(scenario.users.size());
  if (scenario.channel_model == ChannelModelKind::kLos) {
    for (size_t k = 0; k < scenario.users.size(); ++k) {
      real.smallscale[k] = Eigen::VectorXcd::Ones(scenario.n_t);
    }
    return real;
  }
  std::mt19937_64 rng(seed);
  for (size_t k = 0; k < scenario.users.size(); ++k) {
    const double theta = elevation_angle(reference, scenario.users[k]);
    const double kf = rician_k_factor(theta, scenario.rician);
    real.smallscale[k].resize(scenario.n_t);
    for (int j = 0; j < scenario.n_t; ++j) {
      real.smallscale[k](j) = sample_rician_fading(kf, rng);
    }
  }
  return real;
}

std::vector<ChannelVector> channels_at(const Scenario& scenario,
                                       const ChannelRealization& realization,
                                       const Position3D& q) {
  std::vector<ChannelVector> channels(scenario.users.size());
  for (size_t k = 0; k < scenario.users.size(); ++k) {
    const double d = distance(q, scenario.users[k]);
    channels[k].coefficients =
        std::pow(d, -scenario.beta / 2.0) * realization.smallscale[k];
    channels[k].distance = d;
    channels[k].user_index = static_cast<int>(k);
  }
  return channels;
}

RateReport evaluate_solution(const Scenario& scenario,
                             const ChannelRealization& realization, Scheme scheme,
                             const Position3D& q, const Precoder& precoder,
                             const RateSplit& split) {
  const auto channels = channels_at(scenario, realization, q);
  if (scheme == Scheme::kNoma) {
    RateReport rep;
    rep.private_rates = noma_user_rates(channels, precoder, scenario.sigma2);
    rep.common_rates = Eigen::VectorXd::Zero(scenario.num_users());
    rep.overall_rates = rep.private_rates;
    rep.wsr = scenario.weights.dot(rep.overall_rates);
    return rep;
  }
  const RateSplit feasible = clamp_to_cap(channels, precoder, split.common_portions,
                                          scenario.sigma2);
  return rate_report(channels, precoder, feasible, scenario.weights, scenario.sigma2);
}

namespace {

// One run of the alternation from a given converged precoder state at q0.
JointSolution alternate_from(const Scenario& scenario, Scheme scheme,
                             const JointOptParams& params,
                             const ChannelRealization& realization,
                             const PrecoderOptParams& inner_params,
                             Position3D q, PrecoderOptResult state) {
  double wsr = state.report.wsr;

  JointSolution solution;
  solution.scheme = scheme;
  auto append_inner = [&](const RunTrace& t, bool skip_init) {
    for (size_t i = skip_init ? 1 : 0; i < t.entries.size(); ++i) {
      solution.inner_wsr.push_back(t.entries[i].wsr_bps_hz);
    }
  };
  append_inner(state.trace, false);
  auto push = [&](int iter, double value, const Position3D& pos,
                  const Eigen::VectorXd& rates, const std::string& status) {
    TraceEntry e;
    e.iteration = iter;
    e.wsr_bps_hz = value;
    e.uav = pos;
    e.user_rates = rates;
    e.status = status;
    solution.trace.entries.push_back(std::move(e));
  };
  push(0, wsr, q, state.report.overall_rates, "init");

  for (int l = 1; l <= params.max_outer_iterations; ++l) {
    PlacementResult placed = run_placement(scenario, q, state, params.placement);
    Position3D q_cand = placed.status == PlacementStatus::kInfeasibleInitial
                            ? q
                            : placed.position;
    PrecoderOptResult cand =
        run_precoder(scenario, channels_at(scenario, realization, q_cand), scheme,
                     inner_params, &state);

    if (cand.report.wsr + 1e-9 < wsr) {
      // Both block updates failed to improve; the alternation is stuck at the
      // previous iterate and would only repeat itself.
      push(l, wsr, q, state.report.overall_rates, "retained");
      solution.converged = true;
      break;
    }
    q = q_cand;
    state = std::move(cand);
    append_inner(state.trace, true);
    push(l, state.report.wsr, q, state.report.overall_rates,
         placed.status == PlacementStatus::kInfeasibleInitial ? "placement_infeasible"
                                                              : "optimal");
    if (std::abs(state.report.wsr - wsr) <= params.epsilon) {
      wsr = state.report.wsr;
      solution.converged = true;
      break;
    }
    wsr = state.report.wsr;
  }

  solution.uav_position = q;
  solution.precoder = state.precoder;
  solution.rate_split = state.split;
  solution.report = state.report;
  return solution;
}

}  // namespace

JointSolution alternating_optimize(const Scenario& scenario, Scheme scheme,
                                   const JointOptParams& params, uint64_t seed) {
  scenario.validate();
  const Position3D q0 = scenario.baseline_position();
  const ChannelRealization realization = draw_channel_realization(scenario, q0, seed);

  PrecoderOptParams inner_params = params.precoder;
  inner_params.seed = seed;
  PrecoderCandidates candidates =
      cold_candidates(scenario, channels_at(scenario, realization, q0), scheme,
                      inner_params);
  const int best = best_candidate(candidates);

  // The fixed-position winner can be a placement dead end when the users are
  // symmetric around the start, so the alternation also explores single-user
  // concentration starts and keeps whichever lands highest. For the multi-beam
  // schemes a concentration beam is always a legitimate operating point; for
  // the superposition chain the corners only matter when the gains genuinely
  // differ, since under tied gains every split reaches the same sum rate and
  // the balanced chain is the canonical point.
  std::vector<int> extra_starts;
  if (scheme != Scheme::kNoma) {
    int best_corner = -1;
    for (size_t i = 0; i < candidates.results.size(); ++i) {
      if (!candidates.corner[i] || static_cast<int>(i) == best) continue;
      if (best_corner < 0 || candidates.results[i].report.wsr >
                                 candidates.results[best_corner].report.wsr) {
        best_corner = static_cast<int>(i);
      }
    }
    if (best_corner >= 0) extra_starts.push_back(best_corner);
  } else {
    const double base = candidates.results[0].report.wsr;
    bool asymmetric = false;
    for (size_t i = 0; i < candidates.results.size(); ++i) {
      if (candidates.corner[i] && candidates.results[i].report.wsr >
                                      base + 1e-6 * std::max(1.0, std::abs(base))) {
        asymmetric = true;
      }
    }
    if (asymmetric) {
      for (size_t i = 0; i < candidates.results.size(); ++i) {
        if (candidates.corner[i] && static_cast<int>(i) != best) {
          extra_starts.push_back(static_cast<int>(i));
        }
      }
    }
  }

  JointSolution solution =
      alternate_from(scenario, scheme, params, realization, inner_params, q0,
                     std::move(candidates.results[best]));
  for (int idx : extra_starts) {
    JointSolution alt =
        alternate_from(scenario, scheme, params, realization, inner_params, q0,
                       std::move(candidates.results[idx]));
    if (alt.report.wsr > solution.report.wsr + 1e-9) solution = std::move(alt);
  }

  if (scheme == Scheme::kRsma) {
    // Private-only operation is a restriction of this scheme, so continuing
    // from the converged restricted joint solution can only improve on it.
    // Accepted only on a clear win to keep the cheaper run on near ties.
    JointSolution restricted =
        alternating_optimize(scenario, Scheme::kSdma, params, seed);
    PrecoderOptResult warm;
    warm.precoder = restricted.precoder;
    warm.split.common_portions = Eigen::VectorXd::Zero(scenario.num_users());
    warm.report = restricted.report;
    PrecoderOptResult polished = run_precoder(
        scenario, channels_at(scenario, realization, restricted.uav_position),
        scheme, inner_params, &warm);
    JointSolution alt =
        alternate_from(scenario, scheme, params, realization, inner_params,
                       restricted.uav_position, std::move(polished));
    alt.inner_wsr.insert(alt.inner_wsr.begin(), restricted.inner_wsr.begin(),
                         restricted.inner_wsr.end());
    const double margin = 5e-7 * std::max(1.0, std::abs(alt.report.wsr));
    if (alt.report.wsr > solution.report.wsr + margin) solution = std::move(alt);
  }
  return solution;
}

JointSolution avg_location_baseline(const Scenario& scenario, Scheme scheme,
                                    const JointOptParams& params, uint64_t seed) {
  scenario.validate();
  const Position3D q = scenario.baseline_position();
  const ChannelRealization realization = draw_channel_realization(scenario, q, seed);
  PrecoderOptParams inner_params = params.precoder;
  inner_params.seed = seed;
  PrecoderOptResult state =
      run_precoder(scenario, channels_at(scenario, realization, q), scheme,
                   inner_params, nullptr);

  JointSolution solution;
  solution.scheme = scheme;
  solution.uav_position = q;
  solution.precoder = state.precoder;
  solution.rate_split = state.split;
  solution.report = state.report;
  solution.converged = state.converged;
  solution.trace = std::move(state.trace);
  for (auto& e : solution.trace.entries) {
    e.uav = q;
    solution.inner_wsr.push_back(e.wsr_bps_hz);
  }
  return solution;
}

}  // namespace uavrsma
