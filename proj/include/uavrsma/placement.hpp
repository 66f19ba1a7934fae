#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "uavrsma/qcqp.hpp"
#include "uavrsma/signal_model.hpp"

namespace uavrsma {

struct PlacementBox {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double z_min = 0.0, z_max = 0.0;

  bool contains(const Position3D& q, double tol = 1e-9) const {
    return q.x >= x_min - tol && q.x <= x_max + tol && q.y >= y_min - tol &&
           q.y <= y_max + tol && q.z >= z_min - tol && q.z <= z_max + tol;
  }
};

// First-order surrogate coefficients of the private rates in d^2.
struct ScaCoefficients {
  Eigen::VectorXd a;                    // A_k >= 0, bits/s/Hz per m^2
  Eigen::VectorXd b;                    // B_k, true private rate at q_l
  Eigen::VectorXd expansion_distances;  // d_k^(l), meters
};

struct QosData {
  Eigen::VectorXd lambdas;    // Lambda_k = 2^{(R_th - r_k)} - 1, per-Hz rates
  std::vector<bool> vacuous;  // Lambda_k <= 0: constraint dropped
};

// Large-scale stream power |1^T p_i|^2 of column i.
double largescale_power(const Precoder& precoder, int col);

ScaCoefficients sca_coefficients(const Position3D& q_l, const Precoder& precoder,
                                 const std::vector<Position3D>& users, double sigma2);

// -A_k (d_k^2 - (d_k^l)^2) + B_k at position q.
double rate_lower_bound(const Position3D& q, const ScaCoefficients& coeffs,
                        const std::vector<Position3D>& users, int k);

QosData qos_data(const Eigen::VectorXd& rate_thresholds, const RateSplit& split);

struct P3Program {
  ConvexQcqp qp;        // variables: [x, y, z, eta_1..eta_K]
  bool feasible = true; // false when a QoS ball has negative squared radius
};

P3Program build_p3(const Position3D& q_l, const Precoder& precoder,
                   const RateSplit& split, const std::vector<Position3D>& users,
                   const Eigen::VectorXd& weights, const Eigen::VectorXd& rate_thresholds,
                   double sigma2, const PlacementBox& box);

// Scheme-agnostic description of the rates the placement step maximizes.
// Each term's rate is the minimum over its decoders of
// log2(1 + signal / (interference + sigma2 * d_user^2)).
struct PlacementDecoder {
  int user = 0;
  double signal_power = 0.0;        // |1^T p_signal|^2
  double interference_power = 0.0;  // sum of |1^T p_i|^2 over uncancelled others
};

struct PlacementTerm {
  double weight = 1.0;
  std::vector<PlacementDecoder> decoders;
};

double placement_objective(const Position3D& q, const std::vector<PlacementTerm>& terms,
                           const std::vector<Position3D>& users, double sigma2);

struct PlacementParams {
  double epsilon = 1e-4;
  int max_iterations = 50;
};

enum class PlacementStatus { kConverged, kMaxIterations, kInfeasibleInitial };

struct PlacementResult {
  Position3D position;
  std::vector<double> objective_trace;  // true objective per SCA iterate
  PlacementStatus status = PlacementStatus::kConverged;
  int iterations = 0;
};

// SCA loop over the generic term model; QoS balls apply per-user when given
// (pass an empty vector of radii to disable).
PlacementResult optimize_placement_terms(
    const Position3D& q0, const std::vector<PlacementTerm>& terms,
    const std::vector<Position3D>& users, double sigma2, const PlacementBox& box,
    const std::vector<std::pair<int, double>>& qos_balls,  // (user, radius^2)
    const PlacementParams& params);

// The P2/P3 placement problem: private-rate surrogates of the given precoder.
PlacementResult optimize_placement(const Position3D& q0, const Precoder& precoder,
                                   const RateSplit& split,
                                   const std::vector<Position3D>& users,
                                   const Eigen::VectorXd& weights,
                                   const Eigen::VectorXd& rate_thresholds,
                                   double sigma2, const PlacementBox& box,
                                   const PlacementParams& params);

}  // namespace uavrsma
