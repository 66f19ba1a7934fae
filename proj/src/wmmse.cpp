#include "uavrsma/wmmse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace uavrsma {

namespace {

constexpr double kLog2e = 1.4426950408889634;

// Real-stacked variable layout: n_cols precoder columns as [Re; Im] blocks of
// length n_t each, followed by n_extra scalar variables.
struct Layout {
  int n_t = 0;
  int n_cols = 0;
  int n_extra = 0;

  int dim() const { return 2 * n_t * n_cols + n_extra; }
  int col(int c) const { return 2 * n_t * c; }
  int extra(int j) const { return 2 * n_t * n_cols + j; }
};

// Rows a, b with a'x = Re(h^H p_c), b'x = Im(h^H p_c).
void inner_product_rows(const Layout& layout, int c, const Eigen::VectorXcd& h,
                        Eigen::VectorXd& a, Eigen::VectorXd& b) {
  a.setZero(layout.dim());
  b.setZero(layout.dim());
  const int off = layout.col(c);
  const int n = layout.n_t;
  a.segment(off, n) = h.real();
  a.segment(off + n, n) = h.imag();
  b.segment(off, n) = -h.imag();
  b.segment(off + n, n) = h.real();
}

// zeta(x) = u * (|e|^2 (sigma2 + sum_{c in set} |h^H p_c|^2)
//               - 2 Re(e h^H p_signal) + 1) - log2(u),
// as a quadratic form over the layout (convex: Q is a sum of outer products).
QuadraticForm zeta_form(const Layout& layout, const Eigen::VectorXcd& h,
                        std::complex<double> e, double u, int signal_col,
                        const std::vector<int>& interference_cols, double sigma2) {
  QuadraticForm f;
  const int n = layout.dim();
  f.Q = Eigen::MatrixXd::Zero(n, n);
  f.c = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd a(n), b(n);
  const double e2 = std::norm(e);
  for (int c : interference_cols) {
    inner_product_rows(layout, c, h, a, b);
    f.Q += (2.0 * u * e2) * (a * a.transpose() + b * b.transpose());
  }
  inner_product_rows(layout, signal_col, h, a, b);
  f.c = -2.0 * u * (e.real() * a - e.imag() * b);
  f.d = u * (e2 * sigma2 + 1.0) - std::log2(u);
  return f;
}

// tr(PP^H) <= p_t over the precoder block.
QuadraticForm power_constraint(const Layout& layout, double p_t) {
  QuadraticForm f;
  const int n = layout.dim();
  f.Q = Eigen::MatrixXd::Zero(n, n);
  f.Q.topLeftCorner(2 * layout.n_t * layout.n_cols, 2 * layout.n_t * layout.n_cols) =
      2.0 * Eigen::MatrixXd::Identity(2 * layout.n_t * layout.n_cols,
                                      2 * layout.n_t * layout.n_cols);
  f.c = Eigen::VectorXd::Zero(n);
  f.d = -p_t;
  return f;
}

Eigen::VectorXd pack_columns(const Layout& layout, const Eigen::MatrixXcd& cols,
                             const Eigen::VectorXd& extras) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.dim());
  for (int c = 0; c < layout.n_cols; ++c) {
    x.segment(layout.col(c), layout.n_t) = cols.col(c).real();
    x.segment(layout.col(c) + layout.n_t, layout.n_t) = cols.col(c).imag();
  }
  for (int j = 0; j < layout.n_extra; ++j) x(layout.extra(j)) = extras(j);
  return x;
}

Eigen::MatrixXcd unpack_columns(const Layout& layout, const Eigen::VectorXd& x) {
  Eigen::MatrixXcd cols(layout.n_t, layout.n_cols);
  for (int c = 0; c < layout.n_cols; ++c) {
    cols.col(c).real() = x.segment(layout.col(c), layout.n_t);
    cols.col(c).imag() = x.segment(layout.col(c) + layout.n_t, layout.n_t);
  }
  return cols;
}

std::complex<double> rx_gain(const Eigen::VectorXcd& h, const Eigen::VectorXcd& p) {
  return (h.adjoint() * p)(0, 0);
}

int check_problem(const PrecoderProblem& problem) {
  const int k_users = static_cast<int>(problem.channels.size());
  if (k_users < 1) throw std::invalid_argument("precoder-opt: no users");
  if (problem.p_t <= 0.0) throw std::invalid_argument("precoder-opt: P_t must be > 0");
  if (problem.weights.size() != k_users ||
      problem.rate_thresholds.size() != k_users) {
    throw std::invalid_argument("precoder-opt: dimension mismatch");
  }
  return k_users;
}

Eigen::VectorXcd channel_sum_dir(const PrecoderProblem& problem) {
  const int n_t = static_cast<int>(problem.channels[0].coefficients.size());
  Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(n_t);
  for (const auto& ch : problem.channels) sum += ch.coefficients;
  if (sum.norm() < 1e-12) sum = problem.channels[0].coefficients;
  return sum / sum.norm();
}

Eigen::VectorXcd mf_dir(const PrecoderProblem& problem, int k) {
  const Eigen::VectorXcd& h = problem.channels[k].coefficients;
  return h / h.norm();
}

// Matched-filter split: private beams share 0.9 P_t (all of P_t without a
// common stream), the common beam points along the channel sum.
Precoder mf_split_precoder(const PrecoderProblem& problem, bool with_common) {
  const int k_users = static_cast<int>(problem.channels.size());
  const int n_t = static_cast<int>(problem.channels[0].coefficients.size());
  Precoder p;
  p.columns = Eigen::MatrixXcd::Zero(n_t, k_users + 1);
  const double private_share = with_common ? 0.9 : 1.0;
  for (int k = 0; k < k_users; ++k) {
    p.columns.col(k + 1) =
        std::sqrt(private_share * problem.p_t / k_users) * mf_dir(problem, k);
  }
  if (with_common) {
    p.columns.col(0) = std::sqrt(0.1 * problem.p_t) * channel_sum_dir(problem);
  }
  return p;
}

// Nearly all power on one user's matched filter. Escapes the balanced saddle
// that appears when users are equidistant from the starting position.
Precoder corner_precoder(const PrecoderProblem& problem, int strong, bool with_common) {
  const int k_users = static_cast<int>(problem.channels.size());
  const int n_t = static_cast<int>(problem.channels[0].coefficients.size());
  Precoder p;
  p.columns = Eigen::MatrixXcd::Zero(n_t, k_users + 1);
  const double rest = with_common ? 0.02 : 0.02;
  const double main = with_common ? 0.96 : 0.98;
  for (int k = 0; k < k_users; ++k) {
    const double share = k == strong
                             ? main
                             : (k_users > 1 ? rest / (k_users - 1) : 0.0);
    if (share > 0.0) {
      p.columns.col(k + 1) = std::sqrt(share * problem.p_t) * mf_dir(problem, k);
    }
  }
  if (with_common) {
    p.columns.col(0) = std::sqrt(0.02 * problem.p_t) * channel_sum_dir(problem);
  }
  return p;
}

Precoder common_heavy_precoder(const PrecoderProblem& problem) {
  const int k_users = static_cast<int>(problem.channels.size());
  Precoder p = mf_split_precoder(problem, true);
  p.columns.col(0) = std::sqrt(0.9 * problem.p_t) * channel_sum_dir(problem);
  for (int k = 0; k < k_users; ++k) {
    p.columns.col(k + 1) =
        std::sqrt(0.1 * problem.p_t / k_users) * mf_dir(problem, k);
  }
  return p;
}

// Common stream carries the weakest user, a private beam the strongest; this
// mirrors a 2-user superposition solution inside the rate-splitting format.
Precoder layered_precoder(const PrecoderProblem& problem) {
  const int k_users = static_cast<int>(problem.channels.size());
  const int n_t = static_cast<int>(problem.channels[0].coefficients.size());
  int weak = 0;
  int strong = 0;
  for (int k = 1; k < k_users; ++k) {
    const double n = problem.channels[k].coefficients.norm();
    if (n < problem.channels[weak].coefficients.norm()) weak = k;
    if (n > problem.channels[strong].coefficients.norm()) strong = k;
  }
  Precoder p;
  p.columns = Eigen::MatrixXcd::Zero(n_t, k_users + 1);
  p.columns.col(0) = std::sqrt(0.45 * problem.p_t) * mf_dir(problem, weak);
  p.columns.col(strong + 1) = std::sqrt(0.45 * problem.p_t) * mf_dir(problem, strong);
  for (int k = 0; k < k_users; ++k) {
    if (k == strong) continue;
    p.columns.col(k + 1) =
        std::sqrt(0.1 * problem.p_t / std::max(1, k_users - 1)) * mf_dir(problem, k);
  }
  return p;
}

Precoder random_precoder(const PrecoderProblem& problem, uint64_t seed,
                         bool with_common) {
  const int k_users = static_cast<int>(problem.channels.size());
  const int n_t = static_cast<int>(problem.channels[0].coefficients.size());
  Precoder p;
  p.columns = Eigen::MatrixXcd::Zero(n_t, k_users + 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const int first = with_common ? 0 : 1;
  for (int c = first; c <= k_users; ++c) {
    for (int j = 0; j < n_t; ++j) {
      p.columns(j, c) = std::complex<double>(n01(rng), n01(rng));
    }
  }
  p.columns *= std::sqrt(problem.p_t / p.columns.squaredNorm());
  return p;
}

// Cold-start candidates. The AO is a local method, so each start is run to
// convergence and the best converged WSR wins.
std::vector<Precoder> cold_starts(const PrecoderProblem& problem,
                                  const PrecoderOptParams& params, bool with_common) {
  const int k_users = static_cast<int>(problem.channels.size());
  if (params.init_strategy == InitStrategy::kRandomSeeded) {
    return {random_precoder(problem, params.seed, with_common)};
  }
  std::vector<Precoder> starts;
  starts.push_back(mf_split_precoder(problem, with_common));
  for (int k = 0; k < k_users; ++k) {
    starts.push_back(corner_precoder(problem, k, with_common));
  }
  if (with_common && k_users > 1) {
    starts.push_back(common_heavy_precoder(problem));
    starts.push_back(layered_precoder(problem));
  }
  return starts;
}

}  // namespace

std::pair<double, double> received_powers(const ChannelVector& h,
                                          const Precoder& precoder, double sigma2) {
  double t_common = sigma2;
  for (int i = 0; i < precoder.columns.cols(); ++i) {
    t_common += std::norm(rx_gain(h.coefficients, precoder.columns.col(i)));
  }
  const double t_private =
      t_common - std::norm(rx_gain(h.coefficients, precoder.columns.col(0)));
  return {t_common, t_private};
}

std::pair<std::complex<double>, std::complex<double>> mmse_equalizers(
    const ChannelVector& h, const Precoder& precoder, double sigma2) {
  const auto [t_common, t_private] = received_powers(h, precoder, sigma2);
  const int k = h.user_index;
  const std::complex<double> e_common =
      std::conj(rx_gain(h.coefficients, precoder.columns.col(0))) / t_common;
  const std::complex<double> e_private =
      std::conj(rx_gain(h.coefficients, precoder.columns.col(k + 1))) / t_private;
  return {e_common, e_private};
}

double mse(const ChannelVector& h, const Precoder& precoder,
           std::complex<double> equalizer, StreamKind stream, double sigma2) {
  const auto [t_common, t_private] = received_powers(h, precoder, sigma2);
  const double t = stream == StreamKind::kCommon ? t_common : t_private;
  const int col = stream == StreamKind::kCommon ? 0 : h.user_index + 1;
  const std::complex<double> g = rx_gain(h.coefficients, precoder.columns.col(col));
  return std::norm(equalizer) * t - 2.0 * (equalizer * g).real() + 1.0;
}

double awmse(double mse_value, double weight) {
  if (weight <= 0.0) throw std::invalid_argument("awmse: weight must be > 0");
  return weight * mse_value - std::log2(weight);
}

Eigen::VectorXd optimal_weights(const Eigen::VectorXd& mmse_values) {
  if ((mmse_values.array() <= 0.0).any()) {
    throw std::domain_error("optimal_weights: nonpositive MMSE value");
  }
  return mmse_values.cwiseInverse();
}

P5Solution solve_p5_given_ue(const PrecoderProblem& problem, const WmmseState& state) {
  const int k_users = check_problem(problem);
  const int n_t = static_cast<int>(problem.channels[0].coefficients.size());
  Layout layout{n_t, k_users + 1, k_users};
  ConvexQcqp qp(layout.dim());

  std::vector<int> all_cols(k_users + 1);
  std::iota(all_cols.begin(), all_cols.end(), 0);
  std::vector<int> private_cols(k_users);
  std::iota(private_cols.begin(), private_cols.end(), 1);

  // Objective: sum_k w_k (v_k + zeta_k^k(P)).
  QuadraticForm obj;
  obj.Q = Eigen::MatrixXd::Zero(layout.dim(), layout.dim());
  obj.c = Eigen::VectorXd::Zero(layout.dim());
  for (int k = 0; k < k_users; ++k) {
    QuadraticForm zk =
        zeta_form(layout, problem.channels[k].coefficients, state.e_private(k),
                  state.u_private(k), k + 1, private_cols, problem.sigma2);
    const double w = problem.weights(k);
    obj.Q += w * zk.Q;
    obj.c += w * zk.c;
    obj.d += w * zk.d;
    obj.c(layout.extra(k)) += w;
  }
  qp.set_objective(obj);

  // P5.a (per user): zeta_k^0(P) - sum_j v_j - 1 <= 0.
  for (int k = 0; k < k_users; ++k) {
    QuadraticForm f =
        zeta_form(layout, problem.channels[k].coefficients, state.e_common(k),
                  state.u_common(k), 0, all_cols, problem.sigma2);
    for (int j = 0; j < k_users; ++j) f.c(layout.extra(j)) -= 1.0;
    f.d -= 1.0;
    qp.add_constraint(std::move(f));
  }
  // P5.b: v_k + zeta_k^k(P) <= 1 - R_k,th.
  for (int k = 0; k < k_users; ++k) {
    QuadraticForm f =
        zeta_form(layout, problem.channels[k].coefficients, state.e_private(k),
                  state.u_private(k), k + 1, private_cols, problem.sigma2);
    f.c(layout.extra(k)) += 1.0;
    f.d -= 1.0 - problem.rate_thresholds(k);
    qp.add_constraint(std::move(f));
  }
  // P5.c and P5.d.
  qp.add_constraint(power_constraint(layout, problem.p_t));
  for (int k = 0; k < k_users; ++k) {
    qp.set_bound(layout.extra(k), -std::numeric_limits<double>::infinity(), 0.0);
  }

  SolverOptions options;
  options.max_iter = 400;
  if (state.precoder.columns.size() > 0) {
    // Best-effort warm start just inside the power ball; the kernel falls back
    // to phase 1 when this is not strictly feasible.
    Eigen::MatrixXcd cols = state.precoder.columns;
    const double pow = cols.squaredNorm();
    if (pow > 0.999 * problem.p_t) cols *= std::sqrt(0.999 * problem.p_t / pow);
    Eigen::VectorXd v0 = state.v.cwiseMin(-1e-9) * 1.001;
    options.warm_start = pack_columns(layout, cols, v0);
    options.has_warm_start = true;
  }

  SolveResult res = solve(qp, options);
  P5Solution sol;
  sol.status = res.status;
  if (res.status != SolveStatus::kInfeasible) {
    sol.precoder.columns = unpack_columns(layout, res.point);
    sol.v = res.point.tail(k_users);
  }
  return sol;
}

namespace {

RateSplit clamp_split(const std::vector<ChannelVector>& channels,
                      const Precoder& precoder, Eigen::VectorXd r, double sigma2) {
  r = r.cwiseMax(0.0);
  const double cap = common_rate_cap(channels, precoder, sigma2);
  const double total = r.sum();
  if (total > cap) {
    if (cap <= 0.0) {
      r.setZero();
    } else {
      r *= cap / total;
    }
  }
  return RateSplit{std::move(r)};
}

void push_trace(RunTrace& trace, int iter, const RateReport& report,
                const std::string& status) {
  TraceEntry e;
  e.iteration = iter;
  e.wsr_bps_hz = report.wsr;
  e.user_rates = report.overall_rates;
  e.status = status;
  trace.entries.push_back(std::move(e));
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    default: return "max_iterations";
  }
}

}  // namespace

namespace {

PrecoderOptResult rsma_run(const PrecoderProblem& problem,
                           const PrecoderOptParams& params, const Precoder& init,
                           const Eigen::VectorXd& r0) {
  const int k_users = check_problem(problem);
  PrecoderOptResult result;
  result.precoder = init;
  result.split = clamp_split(problem.channels, result.precoder, r0, problem.sigma2);
  result.report = rate_report(problem.channels, result.precoder, result.split,
                              problem.weights, problem.sigma2);
  push_trace(result.trace, 0, result.report, "init");

  double wsr_prev = result.report.wsr;
  for (int l = 1; l <= params.max_outer_iterations; ++l) {
    WmmseState state;
    state.e_common.resize(k_users);
    state.e_private.resize(k_users);
    state.u_common.resize(k_users);
    state.u_private.resize(k_users);
    for (int k = 0; k < k_users; ++k) {
      const auto [e0, ek] =
          mmse_equalizers(problem.channels[k], result.precoder, problem.sigma2);
      state.e_common(k) = e0;
      state.e_private(k) = ek;
      state.u_common(k) = 1.0 / mse(problem.channels[k], result.precoder, e0,
                                    StreamKind::kCommon, problem.sigma2);
      state.u_private(k) = 1.0 / mse(problem.channels[k], result.precoder, ek,
                                     StreamKind::kPrivate, problem.sigma2);
    }
    state.v = -result.split.common_portions;
    state.precoder = result.precoder;

    P5Solution sol = solve_p5_given_ue(problem, state);
    if (sol.status == SolveStatus::kInfeasible) {
      push_trace(result.trace, l, result.report, "infeasible");
      break;
    }
    result.precoder = sol.precoder;
    result.split =
        clamp_split(problem.channels, result.precoder, -sol.v, problem.sigma2);
    result.report = rate_report(problem.channels, result.precoder, result.split,
                                problem.weights, problem.sigma2);
    push_trace(result.trace, l, result.report, status_name(sol.status));
    if (std::abs(result.report.wsr - wsr_prev) <= params.epsilon) {
      result.converged = true;
      break;
    }
    wsr_prev = result.report.wsr;
  }
  return result;
}

}  // namespace

int best_candidate(const PrecoderCandidates& candidates) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(candidates.results.size()); ++i) {
    const double cur = candidates.results[best].report.wsr;
    // The margin absorbs solver noise between starts that reach the same
    // stationary value through different trajectories.
    if (candidates.results[i].report.wsr >
        cur + 1e-6 * std::max(1.0, std::abs(cur))) {
      best = i;
    }
  }
  return best;
}

PrecoderCandidates rsma_cold_candidates(const PrecoderProblem& problem,
                                        const PrecoderOptParams& params) {
  const int k_users = check_problem(problem);
  const Eigen::VectorXd r0 = Eigen::VectorXd::Zero(k_users);
  const std::vector<Precoder> starts = cold_starts(problem, params, true);
  PrecoderCandidates out;
  for (size_t i = 0; i < starts.size(); ++i) {
    out.results.push_back(rsma_run(problem, params, starts[i], r0));
    out.corner.push_back(params.init_strategy == InitStrategy::kMatchedFilterSplit &&
                         i >= 1 && i <= static_cast<size_t>(k_users));
  }
  if (params.init_strategy == InitStrategy::kMatchedFilterSplit) {
    // A converged private-only solution is feasible here (zero common power),
    // so continuing from it keeps this scheme at or above its restriction.
    PrecoderCandidates sdma = sdma_cold_candidates(problem, params);
    for (size_t i = 0; i < sdma.results.size(); ++i) {
      out.results.push_back(
          rsma_run(problem, params, sdma.results[i].precoder, r0));
      out.corner.push_back(sdma.corner[i]);
    }
  }
  return out;
}

PrecoderOptResult optimize_rsma(const PrecoderProblem& problem,
                                const PrecoderOptParams& params,
                                const PrecoderOptResult* warm_start) {
  if (warm_start) {
    return rsma_run(problem, params, warm_start->precoder,
                    warm_start->split.common_portions);
  }
  PrecoderCandidates candidates = rsma_cold_candidates(problem, params);
  return std::move(candidates.results[best_candidate(candidates)]);
}

namespace {

PrecoderOptResult sdma_run(const PrecoderProblem& problem,
                           const PrecoderOptParams& params, const Precoder& init) {
  const int k_users = check_problem(problem);
  const int n_t = static_cast<int>(problem.channels[0].coefficients.size());
  Layout layout{n_t, k_users, 0};
  std::vector<int> all_cols(k_users);
  std::iota(all_cols.begin(), all_cols.end(), 0);

  PrecoderOptResult result;
  result.precoder = init;
  result.precoder.columns.col(0).setZero();
  result.split.common_portions = Eigen::VectorXd::Zero(k_users);
  result.report = rate_report(problem.channels, result.precoder, result.split,
                              problem.weights, problem.sigma2);
  push_trace(result.trace, 0, result.report, "init");

  double wsr_prev = result.report.wsr;
  for (int l = 1; l <= params.max_outer_iterations; ++l) {
    // (u, e) closed forms, then the private-only P5 block.
    ConvexQcqp qp(layout.dim());
    QuadraticForm obj;
    obj.Q = Eigen::MatrixXd::Zero(layout.dim(), layout.dim());
    obj.c = Eigen::VectorXd::Zero(layout.dim());
    std::vector<QuadraticForm> qos;
    for (int k = 0; k < k_users; ++k) {
      const auto [e0, ek] =
          mmse_equalizers(problem.channels[k], result.precoder, problem.sigma2);
      const double u = 1.0 / mse(problem.channels[k], result.precoder, ek,
                                 StreamKind::kPrivate, problem.sigma2);
      QuadraticForm zk = zeta_form(layout, problem.channels[k].coefficients, ek, u,
                                   k, all_cols, problem.sigma2);
      obj.Q += problem.weights(k) * zk.Q;
      obj.c += problem.weights(k) * zk.c;
      obj.d += problem.weights(k) * zk.d;
      zk.d -= 1.0 - problem.rate_thresholds(k);
      qos.push_back(std::move(zk));
    }
    qp.set_objective(obj);
    for (auto& f : qos) qp.add_constraint(std::move(f));
    qp.add_constraint(power_constraint(layout, problem.p_t));

    SolverOptions options;
    options.max_iter = 400;
    Eigen::MatrixXcd cols = result.precoder.columns.rightCols(k_users);
    const double pow = cols.squaredNorm();
    if (pow > 0.999 * problem.p_t) cols *= std::sqrt(0.999 * problem.p_t / pow);
    options.warm_start = pack_columns(layout, cols, Eigen::VectorXd());
    options.has_warm_start = true;

    SolveResult res = solve(qp, options);
    if (res.status == SolveStatus::kInfeasible) {
      push_trace(result.trace, l, result.report, "infeasible");
      break;
    }
    result.precoder.columns.rightCols(k_users) = unpack_columns(layout, res.point);
    result.report = rate_report(problem.channels, result.precoder, result.split,
                                problem.weights, problem.sigma2);
    push_trace(result.trace, l, result.report, status_name(res.status));
    if (std::abs(result.report.wsr - wsr_prev) <= params.epsilon) {
      result.converged = true;
      break;
    }
    wsr_prev = result.report.wsr;
  }
  return result;
}

}  // namespace

PrecoderCandidates sdma_cold_candidates(const PrecoderProblem& problem,
                                        const PrecoderOptParams& params) {
  const int k_users = check_problem(problem);
  const std::vector<Precoder> starts = cold_starts(problem, params, false);
  PrecoderCandidates out;
  for (size_t i = 0; i < starts.size(); ++i) {
    out.results.push_back(sdma_run(problem, params, starts[i]));
    out.corner.push_back(params.init_strategy == InitStrategy::kMatchedFilterSplit &&
                         i >= 1 && i <= static_cast<size_t>(k_users));
  }
  return out;
}

PrecoderOptResult sdma_optimize(const PrecoderProblem& problem,
                                const PrecoderOptParams& params,
                                const PrecoderOptResult* warm_start) {
  if (warm_start) return sdma_run(problem, params, warm_start->precoder);
  PrecoderCandidates candidates = sdma_cold_candidates(problem, params);
  return std::move(candidates.results[best_candidate(candidates)]);
}

std::vector<int> noma_decoding_order(const std::vector<ChannelVector>& channels) {
  std::vector<int> order(channels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return channels[a].coefficients.norm() < channels[b].coefficients.norm();
  });
  return order;
}

Eigen::VectorXd noma_user_rates(const std::vector<ChannelVector>& channels,
                                const Precoder& precoder, double sigma2) {
  const int k_users = static_cast<int>(channels.size());
  const std::vector<int> order = noma_decoding_order(channels);
  Eigen::VectorXd rates(k_users);
  for (int rho = 0; rho < k_users; ++rho) {
    const int msg_user = order[rho];
    double rate = std::numeric_limits<double>::infinity();
    // Every user at or after position rho in the chain must decode this
    // message; messages later in the chain are still uncancelled noise.
    for (int iota = rho; iota < k_users; ++iota) {
      const int i = order[iota];
      double interference = sigma2;
      for (int rho2 = rho + 1; rho2 < k_users; ++rho2) {
        interference += std::norm(
            rx_gain(channels[i].coefficients, precoder.columns.col(order[rho2] + 1)));
      }
      const double signal = std::norm(
          rx_gain(channels[i].coefficients, precoder.columns.col(msg_user + 1)));
      rate = std::min(rate, std::log2(1.0 + signal / interference));
    }
    rates(msg_user) = rate;
  }
  return rates;
}

namespace {

PrecoderOptResult noma_run(const PrecoderProblem& problem,
                           const PrecoderOptParams& params, Eigen::VectorXd t) {
  const int k_users = check_problem(problem);
  const int n_t = static_cast<int>(problem.channels[0].coefficients.size());
  const std::vector<int> order = noma_decoding_order(problem.channels);

  // One superposed beam direction shared by the whole SIC chain, pointed at
  // the strongest user; the optimizer allocates power along the chain.
  Eigen::VectorXcd w_dir = problem.channels[order.back()].coefficients;
  w_dir /= w_dir.norm();
  Eigen::VectorXcd c_eff(k_users);
  for (int i = 0; i < k_users; ++i) {
    c_eff(i) = rx_gain(problem.channels[i].coefficients, w_dir);
  }

  auto build_precoder = [&](const Eigen::VectorXd& amps) {
    Precoder p;
    p.columns = Eigen::MatrixXcd::Zero(n_t, k_users + 1);
    for (int rho = 0; rho < k_users; ++rho) {
      p.columns.col(order[rho] + 1) = amps(rho) * w_dir;
    }
    return p;
  };
  auto make_report = [&](const Precoder& p) {
    RateReport rep;
    rep.private_rates = noma_user_rates(problem.channels, p, problem.sigma2);
    rep.common_rates = Eigen::VectorXd::Zero(k_users);
    rep.overall_rates = rep.private_rates;
    rep.wsr = problem.weights.dot(rep.overall_rates);
    return rep;
  };

  PrecoderOptResult result;
  result.precoder = build_precoder(t);
  result.split.common_portions = Eigen::VectorXd::Zero(k_users);
  result.report = make_report(result.precoder);
  push_trace(result.trace, 0, result.report, "init");

  const int dim = 2 * k_users;  // amplitudes then chain slacks xi
  double wsr_prev = result.report.wsr;
  for (int l = 1; l <= params.max_outer_iterations; ++l) {
    ConvexQcqp qp(dim);
    QuadraticForm obj;
    obj.Q = Eigen::MatrixXd::Zero(dim, dim);
    obj.c = Eigen::VectorXd::Zero(dim);
    for (int rho = 0; rho < k_users; ++rho) {
      obj.c(k_users + rho) = problem.weights(order[rho]);
    }
    qp.set_objective(obj);

    Eigen::VectorXd xi0 = Eigen::VectorXd::Constant(k_users,
                                                    -std::numeric_limits<double>::infinity());
    for (int rho = 0; rho < k_users; ++rho) {
      for (int iota = rho; iota < k_users; ++iota) {
        const int i = order[iota];
        const double g2 = std::norm(c_eff(i));
        double total = problem.sigma2;
        for (int c = rho; c < k_users; ++c) total += g2 * t(c) * t(c);
        const std::complex<double> e = std::conj(c_eff(i)) * t(rho) / total;
        const double eps = std::norm(e) * total -
                           2.0 * (e * c_eff(i)).real() * t(rho) + 1.0;
        const double u = 1.0 / eps;
        // zeta as a quadratic in the amplitudes under fixed (u, e).
        QuadraticForm f;
        f.Q = Eigen::MatrixXd::Zero(dim, dim);
        f.c = Eigen::VectorXd::Zero(dim);
        for (int c = rho; c < k_users; ++c) {
          f.Q(c, c) = 2.0 * u * std::norm(e) * g2;
        }
        f.c(rho) = -2.0 * u * (e * c_eff(i)).real();
        f.d = u * (std::norm(e) * problem.sigma2 + 1.0) - std::log2(u);
        f.c(k_users + rho) -= 1.0;
        const double zeta_now = u * eps - std::log2(u);
        xi0(rho) = std::max(xi0(rho), zeta_now);
        qp.add_constraint(std::move(f));
      }
      // QoS on the chain rate: xi_rho <= 1 - R_th of the message owner.
      qp.set_bound(k_users + rho, -std::numeric_limits<double>::infinity(),
                   1.0 - problem.rate_thresholds(order[rho]));
    }
    QuadraticForm pw;
    pw.Q = Eigen::MatrixXd::Zero(dim, dim);
    pw.Q.topLeftCorner(k_users, k_users) =
        2.0 * Eigen::MatrixXd::Identity(k_users, k_users);
    pw.c = Eigen::VectorXd::Zero(dim);
    pw.d = -problem.p_t;
    qp.add_constraint(std::move(pw));

    SolverOptions options;
    options.max_iter = 400;
    Eigen::VectorXd x0(dim);
    x0.head(k_users) = t;
    const double pow = t.squaredNorm();
    if (pow > 0.999 * problem.p_t) {
      x0.head(k_users) *= std::sqrt(0.999 * problem.p_t / pow);
    }
    x0.tail(k_users) = xi0.array() + 1e-7;
    options.warm_start = x0;  // kernel ignores it unless strictly feasible
    options.has_warm_start = true;

    SolveResult res = solve(qp, options);
    if (res.status == SolveStatus::kInfeasible) {
      push_trace(result.trace, l, result.report, "infeasible");
      break;
    }
    t = res.point.head(k_users);
    result.precoder = build_precoder(t);
    result.report = make_report(result.precoder);
    push_trace(result.trace, l, result.report, status_name(res.status));
    if (std::abs(result.report.wsr - wsr_prev) <= params.epsilon) {
      result.converged = true;
      break;
    }
    wsr_prev = result.report.wsr;
  }
  return result;
}

}  // namespace

PrecoderCandidates noma_cold_candidates(const PrecoderProblem& problem,
                                        const PrecoderOptParams& params) {
  const int k_users = check_problem(problem);
  PrecoderCandidates out;
  // Balanced split first, then each single-message corner of the chain.
  Eigen::VectorXd balanced =
      Eigen::VectorXd::Constant(k_users, std::sqrt(problem.p_t / k_users));
  out.results.push_back(noma_run(problem, params, balanced));
  out.corner.push_back(false);
  for (int rho = 0; rho < k_users && k_users > 1; ++rho) {
    Eigen::VectorXd t =
        Eigen::VectorXd::Constant(k_users,
                                  std::sqrt(0.02 * problem.p_t / (k_users - 1)));
    t(rho) = std::sqrt(0.98 * problem.p_t);
    out.results.push_back(noma_run(problem, params, t));
    out.corner.push_back(true);
  }
  return out;
}

PrecoderOptResult noma_optimize(const PrecoderProblem& problem,
                                const PrecoderOptParams& params,
                                const PrecoderOptResult* warm_start) {
  const int k_users = check_problem(problem);
  if (warm_start) {
    const std::vector<int> order = noma_decoding_order(problem.channels);
    Eigen::VectorXd t(k_users);
    for (int rho = 0; rho < k_users; ++rho) {
      t(rho) = warm_start->precoder.columns.col(order[rho] + 1).norm();
    }
    if (t.squaredNorm() < 1e-12 * problem.p_t) {
      t.setConstant(std::sqrt(problem.p_t / k_users));
    }
    return noma_run(problem, params, std::move(t));
  }
  PrecoderCandidates candidates = noma_cold_candidates(problem, params);
  return std::move(candidates.results[best_candidate(candidates)]);
}

}  // namespace uavrsma
