#pragma once

#include <Eigen/Dense>

namespace gapnav {

/// min 1/2 x'Gx + g'x  s.t.  Aeq x = beq,  Ain x >= bin   (G symmetric positive definite)
struct DenseQp {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  Eigen::MatrixXd Aeq;
  Eigen::VectorXd beq;
  Eigen::MatrixXd Ain;
  Eigen::VectorXd bin;
};

enum class QpStatus { optimal, infeasible, iteration_limit };

struct QpSolution {
  QpStatus status = QpStatus::iteration_limit;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda_eq;
  Eigen::VectorXd lambda_in;  // >= 0
  double objective = 0.0;
  int iterations = 0;
};

/// Goldfarb-Idnani dual active-set method.
QpSolution solve_dense_qp(const DenseQp& qp, int max_iterations = 500, double tol = 1e-10);

}  // namespace gapnav
