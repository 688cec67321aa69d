#include "gapnav/dense_qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gapnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ActiveRow {
  Eigen::VectorXd n;  // oriented so the row reads n'x >= b
  double b;
  bool equality;
  int index;
  double sign;  // +1, or -1 for an equality entered with flipped orientation
  double u;
};

class GoldfarbIdnani {
 public:
  explicit GoldfarbIdnani(const DenseQp& qp) : qp_(qp), n_(int(qp.G.rows())) {
    Eigen::LLT<Eigen::MatrixXd> llt(qp.G);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("solve_dense_qp: G is not positive definite");
    L_ = llt.matrixL();
    x_ = -llt.solve(qp.g);
  }

  QpSolution run(int max_iterations, double tol) {
    QpSolution sol;
    const int meq = int(qp_.Aeq.rows());
    const int min = int(qp_.Ain.rows());

    for (int i = 0; i < meq; ++i) {
      Eigen::VectorXd np = qp_.Aeq.row(i).transpose();
      double bp = qp_.beq(i);
      double sign = 1.0;
      if (np.dot(x_) - bp > 0.0) {
        np = -np;
        bp = -bp;
        sign = -1.0;
      }
      if (!add_constraint({np, bp, true, i, sign, 0.0}, sol.iterations, tol)) return finish(sol, QpStatus::infeasible);
    }

    while (true) {
      if (sol.iterations >= max_iterations) return finish(sol, QpStatus::iteration_limit);
      int p = -1;
      double worst = 0.0;
      for (int i = 0; i < min; ++i) {
        if (is_active(i)) continue;
        const double s = qp_.Ain.row(i).dot(x_) - qp_.bin(i);
        const double thresh = -tol * (1.0 + std::abs(qp_.bin(i)));
        if (s < thresh && s < worst) {
          worst = s;
          p = i;
        }
      }
      if (p < 0) return finish(sol, QpStatus::optimal);
      if (!add_constraint({qp_.Ain.row(p).transpose(), qp_.bin(p), false, p, 1.0, 0.0}, sol.iterations, tol))
        return finish(sol, QpStatus::infeasible);
    }
  }

 private:
  bool is_active(int i) const {
    for (const auto& a : active_)
      if (!a.equality && a.index == i) return true;
    return false;
  }

  // Primal direction z = H n_p and dual direction r = N* n_p from a fresh QR of L^-1 N.
  void directions(const Eigen::VectorXd& np, Eigen::VectorXd& z, Eigen::VectorXd& r) const {
    const Eigen::VectorXd w = L_.triangularView<Eigen::Lower>().solve(np);
    const int q = int(active_.size());
    if (q == 0) {
      z = L_.transpose().triangularView<Eigen::Upper>().solve(w);
      r.resize(0);
      return;
    }
    Eigen::MatrixXd M(n_, q);
    for (int j = 0; j < q; ++j) M.col(j) = L_.triangularView<Eigen::Lower>().solve(active_[j].n);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    const Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::VectorXd v = Q.transpose() * w;
    Eigen::VectorXd v2 = Eigen::VectorXd::Zero(n_);
    v2.tail(n_ - q) = v.tail(n_ - q);
    z = L_.transpose().triangularView<Eigen::Upper>().solve(Q * v2);
    const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
    r = R.triangularView<Eigen::Upper>().solve(v.head(q));
  }

  bool add_constraint(ActiveRow row, int& iterations, double tol) {
    double up = 0.0;
    while (true) {
      ++iterations;
      if (iterations > 100000) return false;
      const double s = row.n.dot(x_) - row.b;
      if (row.equality ? std::abs(s) <= tol * (1.0 + std::abs(row.b)) : s >= 0.0) {
        if (row.equality || up > 0.0) {
          row.u = up;
          active_.push_back(row);
        }
        return true;
      }
      Eigen::VectorXd z, r;
      directions(row.n, z, r);

      double t1 = kInf;
      int k = -1;
      for (int j = 0; j < int(active_.size()); ++j) {
        if (active_[j].equality || r(j) <= tol) continue;
        const double t = active_[j].u / r(j);
        if (t < t1) {
          t1 = t;
          k = j;
        }
      }
      const double zn = z.dot(row.n);
      const double t2 = (z.norm() > 1e-12 && zn > 1e-14) ? -s / zn : kInf;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) return false;

      for (int j = 0; j < int(active_.size()); ++j) active_[j].u -= t * r(j);
      up += t;
      if (std::isfinite(t2)) x_ += t * z;
      if (t2 <= t1) {
        row.u = up;
        active_.push_back(row);
        return true;
      }
      active_.erase(active_.begin() + k);
    }
  }

  QpSolution& finish(QpSolution& sol, QpStatus status) {
    sol.status = status;
    sol.x = x_;
    sol.objective = 0.5 * x_.dot(qp_.G * x_) + qp_.g.dot(x_);
    sol.lambda_eq = Eigen::VectorXd::Zero(qp_.Aeq.rows());
    sol.lambda_in = Eigen::VectorXd::Zero(qp_.Ain.rows());
    for (const auto& a : active_) {
      if (a.equality) sol.lambda_eq(a.index) = a.sign * a.u;
      else sol.lambda_in(a.index) = std::max(0.0, a.u);
    }
    return sol;
  }

  const DenseQp& qp_;
  int n_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd x_;
  std::vector<ActiveRow> active_;
};

}  // namespace

QpSolution solve_dense_qp(const DenseQp& qp, int max_iterations, double tol) {
  const auto n = qp.G.rows();
  if (qp.G.cols() != n || qp.g.size() != n) throw std::invalid_argument("solve_dense_qp: objective dimension mismatch");
  if ((qp.Aeq.rows() > 0 && qp.Aeq.cols() != n) || qp.Aeq.rows() != qp.beq.size())
    throw std::invalid_argument("solve_dense_qp: equality dimension mismatch");
  if ((qp.Ain.rows() > 0 && qp.Ain.cols() != n) || qp.Ain.rows() != qp.bin.size())
    throw std::invalid_argument("solve_dense_qp: inequality dimension mismatch");
  if (!qp.G.allFinite() || !qp.g.allFinite() || !qp.Ain.allFinite() || !qp.bin.allFinite() || !qp.Aeq.allFinite() ||
      !qp.beq.allFinite())
    throw std::invalid_argument("solve_dense_qp: non-finite data");
  GoldfarbIdnani solver(qp);
  return solver.run(max_iterations, tol);
}

}  // namespace gapnav
