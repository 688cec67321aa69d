#pragma once

#include <Eigen/Dense>

#include <string>

namespace gapnav {

/// min c'x  s.t.  A x <= b,  0 <= x <= upper   (upper may hold +inf)
struct LpProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd upper;  // empty means unbounded above
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(LpStatus s);

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  int max_iterations = 20000;
  int refactor_period = 50;
};

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  Eigen::VectorXd x;
  /// Row multipliers pi (<= 0 at a minimum); the dual is  max b'pi,  A'pi <= c.
  Eigen::VectorXd duals;
  double objective = 0.0;
  int iterations = 0;
};

/// Bounded-variable revised simplex with an explicit basis inverse and Bland's rule.
LpResult solve_lp(const LpProblem& lp, const LpOptions& opt = {});

}  // namespace gapnav
