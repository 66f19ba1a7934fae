#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>
#include <vector>

namespace uavrsma {

// f(x) = 0.5 x'Qx + c'x + d. Q must be symmetric PSD for convexity.
struct QuadraticForm {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  double d = 0.0;

  double value(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(Q * x) + c.dot(x) + d;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return Q * x + c; }
};

// Canonical small dense convex QCQP:
//   minimize f0(x)  s.t.  fi(x) <= 0,  lo <= x <= hi.
class ConvexQcqp {
 public:
  explicit ConvexQcqp(int n);

  void set_objective(QuadraticForm f);
  void add_constraint(QuadraticForm f);
  void set_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
  void set_bound(int i, double lower, double upper);

  int dimension() const { return n_; }
  const QuadraticForm& objective() const { return objective_; }
  const std::vector<QuadraticForm>& constraints() const { return constraints_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  // Flags indefinite quadratic forms (min eigenvalue < -1e-9 * spectral norm).
  std::vector<std::string> validate() const;

 private:
  int n_;
  QuadraticForm objective_;
  std::vector<QuadraticForm> constraints_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

enum class SolveStatus { kOptimal, kInfeasible, kMaxIterations };

struct SolveResult {
  SolveStatus status = SolveStatus::kMaxIterations;
  Eigen::VectorXd point;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;                    // total Newton steps (both phases)
  std::vector<double> outer_objectives;  // f0 after each barrier stage
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 200;
  // Optional strictly feasible warm start; skips phase 1 when valid.
  bool has_warm_start = false;
  Eigen::VectorXd warm_start;
};

// Primal log-barrier interior-point with a phase-1 feasibility stage.
// Throws std::invalid_argument if validate() reports violations.
SolveResult solve(const ConvexQcqp& problem, const SolverOptions& options = {});

}  // namespace uavrsma
