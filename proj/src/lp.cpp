#include "gapnav/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gapnav {

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Columns: [structural (n) | slacks (m) | artificials (one per negative rhs row)].
class Simplex {
 public:
  Simplex(const LpProblem& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    m_ = int(lp.A.rows());
    n_ = int(lp.A.cols());
    for (int i = 0; i < m_; ++i)
      if (lp.b(i) < 0.0) art_row_.push_back(i);
    total_ = n_ + m_ + int(art_row_.size());
    upper_.assign(total_, kInf);
    for (int j = 0; j < n_ && lp.upper.size() == n_; ++j) upper_[j] = lp.upper(j);
    at_upper_.assign(total_, false);
    basic_pos_.assign(total_, -1);
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;
    for (std::size_t k = 0; k < art_row_.size(); ++k) basis_[art_row_[k]] = n_ + m_ + int(k);
    for (int i = 0; i < m_; ++i) basic_pos_[basis_[i]] = i;
    refactor();
  }

  LpResult run() {
    LpResult res;
    if (!art_row_.empty()) {
      Eigen::VectorXd cost = Eigen::VectorXd::Zero(total_);
      for (int k = 0; k < int(art_row_.size()); ++k) cost(n_ + m_ + k) = 1.0;
      const LpStatus s = iterate(cost, res.iterations);
      if (s == LpStatus::iteration_limit) return finish(res, s);
      double infeas = 0.0;
      for (int k = 0; k < int(art_row_.size()); ++k) infeas += value(n_ + m_ + k);
      if (infeas > opt_.feasibility_tol * (1.0 + lp_.b.lpNorm<Eigen::Infinity>())) return finish(res, LpStatus::infeasible);
      for (int k = 0; k < int(art_row_.size()); ++k) {
        upper_[n_ + m_ + k] = 0.0;
        at_upper_[n_ + m_ + k] = false;
      }
      recompute_xb();
    }
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(total_);
    cost.head(n_) = lp_.c;
    const LpStatus s = iterate(cost, res.iterations);
    return finish(res, s, &cost);
  }

 private:
  double column_entry(int j, int i) const {
    if (j < n_) return lp_.A(i, j);
    if (j < n_ + m_) return (j - n_ == i) ? 1.0 : 0.0;
    return (art_row_[j - n_ - m_] == i) ? -1.0 : 0.0;
  }

  Eigen::VectorXd column(int j) const {
    if (j < n_) return lp_.A.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
    if (j < n_ + m_) e(j - n_) = 1.0;
    else e(art_row_[j - n_ - m_]) = -1.0;
    return e;
  }

  // B^-1 a_j without forming a_j for unit columns.
  Eigen::VectorXd ftran(int j) const {
    if (j < n_) return binv_ * lp_.A.col(j);
    if (j < n_ + m_) return binv_.col(j - n_);
    return -binv_.col(art_row_[j - n_ - m_]);
  }

  double nonbasic_value(int j) const { return at_upper_[j] ? upper_[j] : 0.0; }

  double value(int j) const { return basic_pos_[j] >= 0 ? xb_(basic_pos_[j]) : nonbasic_value(j); }

  void refactor() {
    Eigen::MatrixXd B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = column(basis_[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) throw std::runtime_error("solve_lp: singular basis");
    binv_ = lu.inverse();
    since_refactor_ = 0;
    recompute_xb();
  }

  void recompute_xb() {
    Eigen::VectorXd rhs = lp_.b;
    for (int j = 0; j < total_; ++j)
      if (basic_pos_[j] < 0 && at_upper_[j])
        for (int i = 0; i < m_; ++i) rhs(i) -= column_entry(j, i) * upper_[j];
    xb_ = binv_ * rhs;
  }

  LpStatus iterate(const Eigen::VectorXd& cost, int& iterations) {
    while (true) {
      if (iterations >= opt_.max_iterations) return LpStatus::iteration_limit;
      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb(i) = cost(basis_[i]);
      const Eigen::RowVectorXd pi = cb.transpose() * binv_;

      // Bland: lowest-index improving column.
      int q = -1;
      int sigma = 0;
      for (int j = 0; j < total_ && q < 0; ++j) {
        if (basic_pos_[j] >= 0 || upper_[j] == 0.0) continue;
        double d = cost(j);
        if (j < n_) d -= pi.dot(lp_.A.col(j));
        else if (j < n_ + m_) d -= pi(j - n_);
        else d += pi(art_row_[j - n_ - m_]);
        if (!at_upper_[j] && d < -opt_.optimality_tol) { q = j; sigma = 1; }
        else if (at_upper_[j] && d > opt_.optimality_tol) { q = j; sigma = -1; }
      }
      if (q < 0) return LpStatus::optimal;

      const Eigen::VectorXd w = ftran(q);
      double t_best = upper_[q];  // bound flip
      int leave = -1;             // -1: flip
      bool leave_to_upper = false;
      int leave_var = q;
      // Tiny pivots wreck the inverse; scale the threshold with the column.
      const double piv_tol = 1e-9 * std::max(1.0, w.lpNorm<Eigen::Infinity>());
      for (int i = 0; i < m_; ++i) {
        const double dw = sigma * w(i);
        double t;
        bool to_upper;
        if (dw > piv_tol) {
          t = std::max(0.0, xb_(i)) / dw;
          to_upper = false;
        } else if (dw < -piv_tol && std::isfinite(upper_[basis_[i]])) {
          t = std::max(0.0, upper_[basis_[i]] - xb_(i)) / -dw;
          to_upper = true;
        } else {
          continue;
        }
        const bool better = t < t_best - 1e-12 || (t <= t_best + 1e-12 && basis_[i] < leave_var);
        if (better) {
          t_best = t;
          leave = i;
          leave_to_upper = to_upper;
          leave_var = basis_[i];
        }
      }
      if (!std::isfinite(t_best)) return LpStatus::unbounded;
      ++iterations;

      xb_ -= (sigma * t_best) * w;
      if (leave < 0) {
        at_upper_[q] = !at_upper_[q];
        continue;
      }
      const double entering_value = nonbasic_value(q) + sigma * t_best;
      const int out = basis_[leave];
      basic_pos_[out] = -1;
      at_upper_[out] = leave_to_upper;
      basis_[leave] = q;
      basic_pos_[q] = leave;
      at_upper_[q] = false;
      xb_(leave) = entering_value;

      // Eta update of the explicit inverse.
      const double piv = w(leave);
      binv_.row(leave) /= piv;
      for (int i = 0; i < m_; ++i)
        if (i != leave && w(i) != 0.0) binv_.row(i) -= w(i) * binv_.row(leave);
      if (++since_refactor_ >= opt_.refactor_period) refactor();
    }
  }

  LpResult& finish(LpResult& res, LpStatus s, const Eigen::VectorXd* cost = nullptr) {
    res.status = s;
    res.x.resize(n_);
    for (int j = 0; j < n_; ++j) res.x(j) = std::max(0.0, value(j));
    res.objective = lp_.c.dot(res.x);
    if (cost) {
      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb(i) = (*cost)(basis_[i]);
      res.duals = (cb.transpose() * binv_).transpose();
    } else {
      res.duals = Eigen::VectorXd::Zero(m_);
    }
    return res;
  }

  const LpProblem& lp_;
  LpOptions opt_;
  int m_ = 0, n_ = 0, total_ = 0;
  std::vector<int> art_row_;
  std::vector<double> upper_;
  std::vector<bool> at_upper_;
  std::vector<int> basis_;
  std::vector<int> basic_pos_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  int since_refactor_ = 0;
};

}  // namespace

LpResult solve_lp(const LpProblem& lp, const LpOptions& opt) {
  if (lp.b.size() != lp.A.rows() || lp.c.size() != lp.A.cols())
    throw std::invalid_argument("solve_lp: dimension mismatch");
  if (lp.upper.size() != 0 && lp.upper.size() != lp.A.cols())
    throw std::invalid_argument("solve_lp: upper bound dimension mismatch");
  if (!lp.A.allFinite() || !lp.b.allFinite() || !lp.c.allFinite())
    throw std::invalid_argument("solve_lp: non-finite data");
  if (lp.upper.size() != 0 && (lp.upper.array() < 0.0).any())
    throw std::invalid_argument("solve_lp: negative upper bound");
  if (lp.A.rows() == 0) {
    LpResult res;
    res.x = Eigen::VectorXd::Zero(lp.A.cols());
    res.duals.resize(0);
    for (int j = 0; j < lp.c.size(); ++j) {
      if (lp.c(j) >= 0.0) continue;
      const double u = lp.upper.size() ? lp.upper(j) : kInf;
      if (!std::isfinite(u)) {
        res.status = LpStatus::unbounded;
        return res;
      }
      res.x(j) = u;
    }
    res.status = LpStatus::optimal;
    res.objective = lp.c.dot(res.x);
    return res;
  }
  Simplex s(lp, opt);
  return s.run();
}

}  // namespace gapnav
