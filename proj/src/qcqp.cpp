#include "uavrsma/qcqp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace uavrsma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStrictSlack = 1e-10;   // required margin for "strictly feasible"
constexpr double kArtificialBound = 1e9; // phase-1 trust box on free variables

struct Constraint {
  QuadraticForm f;
  bool linear = false;  // Q == 0, cheaper evaluation
};

double eval(const Constraint& g, const Eigen::VectorXd& x) {
  if (g.linear) return g.f.c.dot(x) + g.f.d;
  return g.f.value(x);
}

Eigen::VectorXd grad(const Constraint& g, const Eigen::VectorXd& x) {
  if (g.linear) return g.f.c;
  return g.f.gradient(x);
}

// One centering stage: Newton descent on t*f0(x) - sum log(-fi(x)).
// Returns false if the Newton budget was exhausted before centering.
bool center(const QuadraticForm& f0, const std::vector<Constraint>& cons,
            double t, Eigen::VectorXd& x, int& newton_left, int& newton_used,
            const std::function<bool(const Eigen::VectorXd&)>& early_stop) {
  const int n = static_cast<int>(x.size());
  // Cap per centering stage: a hard instance must not starve later stages.
  int stage_left = 100;
  while (newton_left > 0) {
    Eigen::VectorXd g = t * f0.gradient(x);
    Eigen::MatrixXd h = t * f0.Q;
    double psi = t * f0.value(x);
    for (const auto& con : cons) {
      const double fi = eval(con, x);
      const Eigen::VectorXd gi = grad(con, x);
      const double inv = 1.0 / (-fi);
      g += inv * gi;
      h += (inv * inv) * (gi * gi.transpose());
      if (!con.linear) h += inv * con.f.Q;
      psi -= std::log(-fi);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      step = ldlt.solve(-g);
    } else {
      Eigen::MatrixXd hr = h + 1e-10 * (1.0 + h.diagonal().cwiseAbs().maxCoeff()) *
                                   Eigen::MatrixXd::Identity(n, n);
      step = hr.ldlt().solve(-g);
    }
    const double decrement2 = -g.dot(step);
    --newton_left;
    ++newton_used;
    if (--stage_left < 0) return true;  // accept the partially centered point
    // The decrement scales with t * f0, so the threshold must be relative:
    // an absolute cutoff stalls late stages in floating-point noise.
    const double inner_tol = 1e-10 * std::max(1.0, std::abs(psi));
    if (!(decrement2 > 2.0 * inner_tol)) return true;  // centered (or stalled flat)

    // Backtracking line search, keeping the iterate strictly interior.
    double alpha = 1.0;
    const double slope = g.dot(step);
    bool moved = false;
    while (alpha > 1e-14) {
      Eigen::VectorXd xn = x + alpha * step;
      bool interior = true;
      double psin = t * f0.value(xn);
      for (const auto& con : cons) {
        const double fi = eval(con, xn);
        if (fi >= 0.0) {
          interior = false;
          break;
        }
        psin -= std::log(-fi);
      }
      if (interior && psin <= psi + 0.25 * alpha * slope) {
        x = xn;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return true;  // numerical floor, accept current center
    if (early_stop && early_stop(x)) return true;
  }
  return false;
}

// Barrier loop: repeated centering with t <- mu * t until m/t <= tol.
// Returns final t (for dual estimates); sets budget_ok=false when exhausted.
double barrier(const QuadraticForm& f0, const std::vector<Constraint>& cons,
               double tol, Eigen::VectorXd& x, int& newton_left, int& newton_used,
               std::vector<double>* stage_objectives, bool& budget_ok,
               const std::function<bool(const Eigen::VectorXd&)>& early_stop) {
  const double mu = 20.0;
  const auto m = static_cast<double>(cons.size());
  double t = 1.0;
  budget_ok = true;
  for (;;) {
    if (!center(f0, cons, t, x, newton_left, newton_used, early_stop)) {
      budget_ok = false;
      return t;
    }
    if (stage_objectives) stage_objectives->push_back(f0.value(x));
    if (early_stop && early_stop(x)) return t;
    if (m / t <= tol) return t;
    t *= mu;
  }
}

}  // namespace

ConvexQcqp::ConvexQcqp(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("ConvexQcqp: dimension must be >= 1");
  objective_.Q = Eigen::MatrixXd::Zero(n, n);
  objective_.c = Eigen::VectorXd::Zero(n);
  lower_ = Eigen::VectorXd::Constant(n, -kInf);
  upper_ = Eigen::VectorXd::Constant(n, kInf);
}

void ConvexQcqp::set_objective(QuadraticForm f) {
  if (f.Q.rows() != n_ || f.Q.cols() != n_ || f.c.size() != n_) {
    throw std::invalid_argument("ConvexQcqp: objective dimension mismatch");
  }
  objective_ = std::move(f);
}

void ConvexQcqp::add_constraint(QuadraticForm f) {
  if (f.Q.rows() != n_ || f.Q.cols() != n_ || f.c.size() != n_) {
    throw std::invalid_argument("ConvexQcqp: constraint dimension mismatch");
  }
  constraints_.push_back(std::move(f));
}

void ConvexQcqp::set_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() != n_ || upper.size() != n_) {
    throw std::invalid_argument("ConvexQcqp: bounds dimension mismatch");
  }
  lower_ = lower;
  upper_ = upper;
}

void ConvexQcqp::set_bound(int i, double lower, double upper) {
  lower_(i) = lower;
  upper_(i) = upper;
}

std::vector<std::string> ConvexQcqp::validate() const {
  std::vector<std::string> violations;
  auto check = [&violations](const QuadraticForm& f, const std::string& name) {
    if (f.Q.cwiseAbs().maxCoeff() == 0.0) return;
    Eigen::MatrixXd sym = 0.5 * (f.Q + f.Q.transpose());
    if ((sym - f.Q).cwiseAbs().maxCoeff() >
        1e-9 * (1.0 + f.Q.cwiseAbs().maxCoeff())) {
      violations.push_back(name + ": quadratic form is not symmetric");
      return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    const double min_ev = es.eigenvalues().minCoeff();
    const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
    if (min_ev < -1e-9 * std::max(1.0, spectral)) {
      violations.push_back(name + ": indefinite quadratic form (min eigenvalue " +
                           std::to_string(min_ev) + ")");
    }
  };
  check(objective_, "objective");
  for (size_t i = 0; i < constraints_.size(); ++i) {
    check(constraints_[i], "constraint " + std::to_string(i));
  }
  for (int i = 0; i < n_; ++i) {
    if (!(lower_(i) < upper_(i))) {
      violations.push_back("bounds: empty interval at coordinate " + std::to_string(i));
    }
  }
  return violations;
}

SolveResult solve(const ConvexQcqp& problem, const SolverOptions& options) {
  {
    auto violations = problem.validate();
    if (!violations.empty()) {
      throw std::invalid_argument("non-convex QCQP rejected: " + violations.front());
    }
  }
  const int n = problem.dimension();

  // Box bounds become linear constraint rows.
  std::vector<Constraint> cons;
  for (const auto& f : problem.constraints()) {
    Constraint c;
    c.f = f;
    c.linear = f.Q.cwiseAbs().maxCoeff() == 0.0;
    cons.push_back(std::move(c));
  }
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(problem.upper()(i))) {
      Constraint c;
      c.linear = true;
      c.f.Q = Eigen::MatrixXd::Zero(n, n);
      c.f.c = Eigen::VectorXd::Zero(n);
      c.f.c(i) = 1.0;
      c.f.d = -problem.upper()(i);
      cons.push_back(std::move(c));
    }
    if (std::isfinite(problem.lower()(i))) {
      Constraint c;
      c.linear = true;
      c.f.Q = Eigen::MatrixXd::Zero(n, n);
      c.f.c = Eigen::VectorXd::Zero(n);
      c.f.c(i) = -1.0;
      c.f.d = problem.lower()(i);
      cons.push_back(std::move(c));
    }
  }

  SolveResult result;
  int newton_left = options.max_iter;
  int newton_used = 0;

  auto strictly_feasible = [&](const Eigen::VectorXd& x) {
    for (const auto& con : cons) {
      if (eval(con, x) > -kStrictSlack) return false;
    }
    return true;
  };

  // Initial point: box midpoint (or a unit step inside one-sided bounds).
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) {
    const double lo = problem.lower()(i);
    const double hi = problem.upper()(i);
    if (std::isfinite(lo) && std::isfinite(hi)) {
      x(i) = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      x(i) = lo + 1.0;
    } else if (std::isfinite(hi)) {
      x(i) = hi - 1.0;
    } else {
      x(i) = 0.0;
    }
  }
  if (options.has_warm_start && options.warm_start.size() == n &&
      strictly_feasible(options.warm_start)) {
    x = options.warm_start;
  }

  if (!strictly_feasible(x)) {
    // Phase 1: minimize s over {fi(x) <= s} inside a large trust box.
    const int np = n + 1;
    std::vector<Constraint> p1cons;
    for (const auto& con : cons) {
      Constraint c;
      c.linear = con.linear;
      c.f.Q = Eigen::MatrixXd::Zero(np, np);
      c.f.Q.topLeftCorner(n, n) = con.f.Q;
      c.f.c = Eigen::VectorXd::Zero(np);
      c.f.c.head(n) = con.f.c;
      c.f.c(n) = -1.0;
      c.f.d = con.f.d;
      p1cons.push_back(std::move(c));
    }
    for (int i = 0; i < n; ++i) {
      for (double sign : {1.0, -1.0}) {
        Constraint c;
        c.linear = true;
        c.f.Q = Eigen::MatrixXd::Zero(np, np);
        c.f.c = Eigen::VectorXd::Zero(np);
        c.f.c(i) = sign;
        c.f.d = -kArtificialBound;
        p1cons.push_back(std::move(c));
      }
    }
    QuadraticForm p1obj;
    p1obj.Q = Eigen::MatrixXd::Zero(np, np);
    p1obj.c = Eigen::VectorXd::Zero(np);
    p1obj.c(n) = 1.0;

    Eigen::VectorXd xs(np);
    xs.head(n) = x.cwiseMax(-0.5 * kArtificialBound).cwiseMin(0.5 * kArtificialBound);
    double fmax = -kInf;
    for (const auto& con : cons) fmax = std::max(fmax, eval(con, xs.head(n).eval()));
    xs(n) = fmax + 1.0 + 0.1 * std::abs(fmax);

    auto found_interior = [&](const Eigen::VectorXd& y) {
      Eigen::VectorXd cand = y.head(n);
      return strictly_feasible(cand);
    };
    bool budget_ok = true;
    barrier(p1obj, p1cons, options.tol, xs, newton_left, newton_used, nullptr,
            budget_ok, found_interior);
    Eigen::VectorXd cand = xs.head(n);
    if (!strictly_feasible(cand)) {
      result.status = budget_ok ? SolveStatus::kInfeasible : SolveStatus::kMaxIterations;
      result.point = cand;
      result.iterations = newton_used;
      return result;
    }
    x = cand;
  }

  bool budget_ok = true;
  const double t_final =
      barrier(problem.objective(), cons, options.tol, x, newton_left, newton_used,
              &result.outer_objectives, budget_ok, nullptr);

  // Dual estimate from the barrier: lambda_i = 1 / (t * (-fi)).
  Eigen::VectorXd stationarity = problem.objective().gradient(x);
  for (const auto& con : cons) {
    stationarity += (1.0 / (t_final * (-eval(con, x)))) * grad(con, x);
  }
  const double grad_scale =
      std::max(1.0, problem.objective().gradient(x).cwiseAbs().maxCoeff());
  const double gap = cons.empty() ? 0.0 : static_cast<double>(cons.size()) / t_final;
  result.kkt_residual =
      std::max(stationarity.cwiseAbs().maxCoeff() / grad_scale, gap);
  result.point = x;
  result.objective_value = problem.objective().value(x);
  result.iterations = newton_used;
  result.status = budget_ok ? SolveStatus::kOptimal : SolveStatus::kMaxIterations;
  return result;
}

}  // namespace uavrsma
