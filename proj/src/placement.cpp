#include "uavrsma/placement.hpp"

#include <cmath>
#include <stdexcept>

namespace uavrsma {

namespace {

constexpr double kLog2e = 1.4426950408889634;

Eigen::Vector3d to_vec(const Position3D& p) { return {p.x, p.y, p.z}; }

// A and B of the Taylor surrogate in d^2 for one (signal, interference) pair
// expanded at distance d_l.
std::pair<double, double> surrogate_ab(double signal, double interference,
                                       double sigma2, double d_l) {
  const double noise = sigma2 * d_l * d_l;
  const double a = kLog2e * signal /
                   ((interference + noise) * (interference + signal + noise));
  const double b = std::log2(1.0 + signal / (interference + noise));
  return {a, b};
}

struct Program {
  ConvexQcqp qp;
  bool feasible = true;
};

Program build_program(const Position3D& q_l, const std::vector<PlacementTerm>& terms,
                      const std::vector<Position3D>& users, double sigma2,
                      const PlacementBox& box,
                      const std::vector<std::pair<int, double>>& qos_balls) {
  const int n_terms = static_cast<int>(terms.size());
  const int n = 3 + n_terms;
  Program prog{ConvexQcqp(n), true};

  QuadraticForm obj;
  obj.Q = Eigen::MatrixXd::Zero(n, n);
  obj.c = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < n_terms; ++t) obj.c(3 + t) = -terms[t].weight;
  prog.qp.set_objective(obj);

  for (int t = 0; t < n_terms; ++t) {
    for (const auto& dec : terms[t].decoders) {
      const Eigen::Vector3d qu = to_vec(users[dec.user]);
      const double d_l = distance(q_l, users[dec.user]);
      const auto [a, b] =
          surrogate_ab(dec.signal_power, dec.interference_power, sigma2, d_l);
      QuadraticForm f;
      f.Q = Eigen::MatrixXd::Zero(n, n);
      f.Q.topLeftCorner(3, 3) = 2.0 * a * Eigen::Matrix3d::Identity();
      f.c = Eigen::VectorXd::Zero(n);
      f.c.head(3) = -2.0 * a * qu;
      f.c(3 + t) = 1.0;
      f.d = a * qu.squaredNorm() - a * d_l * d_l - b;
      prog.qp.add_constraint(std::move(f));
    }
  }
  for (const auto& [user, radius2] : qos_balls) {
    if (radius2 < 0.0) {
      prog.feasible = false;
      return prog;
    }
    const Eigen::Vector3d qu = to_vec(users[user]);
    QuadraticForm f;
    f.Q = Eigen::MatrixXd::Zero(n, n);
    f.Q.topLeftCorner(3, 3) = 2.0 * Eigen::Matrix3d::Identity();
    f.c = Eigen::VectorXd::Zero(n);
    f.c.head(3) = -2.0 * qu;
    f.d = qu.squaredNorm() - radius2;
    prog.qp.add_constraint(std::move(f));
  }
  prog.qp.set_bound(0, box.x_min, box.x_max);
  prog.qp.set_bound(1, box.y_min, box.y_max);
  prog.qp.set_bound(2, box.z_min, box.z_max);
  return prog;
}

std::vector<PlacementTerm> private_rate_terms(const Precoder& precoder,
                                              const Eigen::VectorXd& weights) {
  const int k_users = precoder.num_users();
  std::vector<PlacementTerm> terms(k_users);
  for (int k = 0; k < k_users; ++k) {
    double interference = 0.0;
    for (int i = 0; i < k_users; ++i) {
      if (i != k) interference += largescale_power(precoder, i + 1);
    }
    terms[k].weight = weights(k);
    terms[k].decoders = {{k, largescale_power(precoder, k + 1), interference}};
  }
  return terms;
}

}  // namespace

double largescale_power(const Precoder& precoder, int col) {
  return std::norm(precoder.columns.col(col).sum());
}

ScaCoefficients sca_coefficients(const Position3D& q_l, const Precoder& precoder,
                                 const std::vector<Position3D>& users, double sigma2) {
  const int k_users = static_cast<int>(users.size());
  ScaCoefficients coeffs;
  coeffs.a.resize(k_users);
  coeffs.b.resize(k_users);
  coeffs.expansion_distances.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    double interference = 0.0;
    for (int i = 0; i < k_users; ++i) {
      if (i != k) interference += largescale_power(precoder, i + 1);
    }
    const double d_l = distance(q_l, users[k]);
    const auto [a, b] =
        surrogate_ab(largescale_power(precoder, k + 1), interference, sigma2, d_l);
    coeffs.a(k) = a;
    coeffs.b(k) = b;
    coeffs.expansion_distances(k) = d_l;
  }
  return coeffs;
}

double rate_lower_bound(const Position3D& q, const ScaCoefficients& coeffs,
                        const std::vector<Position3D>& users, int k) {
  const double d = distance(q, users[k]);
  const double d_l = coeffs.expansion_distances(k);
  return -coeffs.a(k) * (d * d - d_l * d_l) + coeffs.b(k);
}

QosData qos_data(const Eigen::VectorXd& rate_thresholds, const RateSplit& split) {
  QosData data;
  const Eigen::VectorXd exponent = rate_thresholds - split.common_portions;
  data.lambdas = (exponent.array() * std::log(2.0)).exp() - 1.0;
  data.vacuous.resize(exponent.size());
  for (int k = 0; k < exponent.size(); ++k) {
    data.vacuous[k] = exponent(k) <= 0.0;
  }
  return data;
}

P3Program build_p3(const Position3D& q_l, const Precoder& precoder,
                   const RateSplit& split, const std::vector<Position3D>& users,
                   const Eigen::VectorXd& weights, const Eigen::VectorXd& rate_thresholds,
                   double sigma2, const PlacementBox& box) {
  const int k_users = static_cast<int>(users.size());
  const QosData qos = qos_data(rate_thresholds, split);
  std::vector<std::pair<int, double>> balls;
  for (int k = 0; k < k_users; ++k) {
    if (qos.vacuous[k]) continue;
    double interference = 0.0;
    for (int i = 0; i < k_users; ++i) {
      if (i != k) interference += largescale_power(precoder, i + 1);
    }
    const double radius2 =
        (largescale_power(precoder, k + 1) / qos.lambdas(k) - interference) / sigma2;
    balls.emplace_back(k, radius2);
  }
  Program prog = build_program(q_l, private_rate_terms(precoder, weights), users,
                               sigma2, box, balls);
  return P3Program{std::move(prog.qp), prog.feasible};
}

double placement_objective(const Position3D& q, const std::vector<PlacementTerm>& terms,
                           const std::vector<Position3D>& users, double sigma2) {
  double total = 0.0;
  for (const auto& term : terms) {
    double rate = std::numeric_limits<double>::infinity();
    for (const auto& dec : term.decoders) {
      const double d = distance(q, users[dec.user]);
      rate = std::min(rate, std::log2(1.0 + dec.signal_power /
                                                (dec.interference_power +
                                                 sigma2 * d * d)));
    }
    total += term.weight * rate;
  }
  return total;
}

PlacementResult optimize_placement_terms(
    const Position3D& q0, const std::vector<PlacementTerm>& terms,
    const std::vector<Position3D>& users, double sigma2, const PlacementBox& box,
    const std::vector<std::pair<int, double>>& qos_balls,
    const PlacementParams& params) {
  if (!box.contains(q0)) {
    throw std::invalid_argument("optimize_placement: q0 outside placement box");
  }
  PlacementResult result;
  result.position = q0;
  double obj_prev = placement_objective(q0, terms, users, sigma2);
  result.objective_trace.push_back(obj_prev);
  result.status = PlacementStatus::kMaxIterations;

  for (int it = 1; it <= params.max_iterations; ++it) {
    result.iterations = it;
    Program prog = build_program(result.position, terms, users, sigma2, box, qos_balls);
    if (!prog.feasible) {
      result.status = PlacementStatus::kInfeasibleInitial;
      return result;
    }
    SolverOptions options;
    options.max_iter = 400;
    SolveResult res = solve(prog.qp, options);
    if (res.status == SolveStatus::kInfeasible) {
      result.status =
          it == 1 ? PlacementStatus::kInfeasibleInitial : PlacementStatus::kConverged;
      return result;
    }
    const Position3D q_new{res.point(0), res.point(1), res.point(2)};
    const double obj = placement_objective(q_new, terms, users, sigma2);
    if (obj < obj_prev - 1e-9) break;  // surrogate floor hit, keep previous point
    result.position = q_new;
    result.objective_trace.push_back(obj);
    if (obj - obj_prev <= params.epsilon) {
      result.status = PlacementStatus::kConverged;
      break;
    }
    obj_prev = obj;
  }
  return result;
}

PlacementResult optimize_placement(const Position3D& q0, const Precoder& precoder,
                                   const RateSplit& split,
                                   const std::vector<Position3D>& users,
                                   const Eigen::VectorXd& weights,
                                   const Eigen::VectorXd& rate_thresholds,
                                   double sigma2, const PlacementBox& box,
                                   const PlacementParams& params) {
  const int k_users = static_cast<int>(users.size());
  const QosData qos = qos_data(rate_thresholds, split);
  std::vector<std::pair<int, double>> balls;
  for (int k = 0; k < k_users; ++k) {
    if (qos.vacuous[k]) continue;
    double interference = 0.0;
    for (int i = 0; i < k_users; ++i) {
      if (i != k) interference += largescale_power(precoder, i + 1);
    }
    balls.emplace_back(
        k, (largescale_power(precoder, k + 1) / qos.lambdas(k) - interference) /
               sigma2);
  }
  return optimize_placement_terms(q0, private_rate_terms(precoder, weights), users,
                                  sigma2, box, balls, params);
}

}  // namespace uavrsma
