#include "gapnav/nmpc.hpp"

#include "gapnav/dense_qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gapnav {

std::string to_string(NmpcStatus s) {
  switch (s) {
    case NmpcStatus::converged: return "converged";
    case NmpcStatus::max_iters: return "max_iters";
    case NmpcStatus::infeasible_relaxed: return "infeasible_relaxed";
  }
  return "unknown";
}

ReferenceTrajectory ReferenceTrajectory::window(std::size_t start, std::size_t n) const {
  if (poses.empty()) throw std::invalid_argument("ReferenceTrajectory::window: empty reference");
  ReferenceTrajectory w;
  w.dt = dt;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = start + k;
    if (i < poses.size()) {
      w.poses.push_back(poses[i]);
      w.twists.push_back(i + 1 < poses.size() ? twists[i] : Twist{0.0, 0.0});
    } else {
      w.poses.push_back(poses.back());
      w.twists.push_back({0.0, 0.0});
    }
  }
  return w;
}

ReferenceTrajectory time_parameterize(const JoinedBezierPath& path, double v_d, double dt) {
  if (!(v_d > 0.0) || !(dt > 0.0)) throw GeometryError("time_parameterize: v_d and dt must be positive");
  constexpr int kTable = 2000;
  std::vector<double> s_tab(kTable + 1), len_tab(kTable + 1, 0.0);
  Vec2 prev = path_position(path, 0.0);
  for (int i = 0; i <= kTable; ++i) {
    s_tab[i] = double(i) / kTable;
    const Vec2 p = path_position(path, s_tab[i]);
    if (i > 0) len_tab[i] = len_tab[i - 1] + (p - prev).norm();
    prev = p;
  }
  const double total = len_tab.back();
  if (!(total > 1e-9)) throw GeometryError("time_parameterize: zero-length path");

  const int n = std::max(1, int(std::lround(total / (v_d * dt))));
  const double ds = total / n;
  ReferenceTrajectory ref;
  ref.dt = dt;
  std::size_t j = 0;
  for (int k = 0; k <= n; ++k) {
    const double target = std::min(total, k * ds);
    while (j + 1 < len_tab.size() && len_tab[j + 1] < target) ++j;
    double s = 1.0;
    if (k < n && j + 1 < len_tab.size()) {
      const double seg = len_tab[j + 1] - len_tab[j];
      const double f = seg > 0.0 ? (target - len_tab[j]) / seg : 0.0;
      s = s_tab[j] + f * (s_tab[j + 1] - s_tab[j]);
    }
    ref.poses.push_back(evaluate(path, s));
  }
  for (int k = 0; k < n; ++k)
    ref.twists.push_back({ds / dt, normalize_angle(ref.poses[k + 1].theta - ref.poses[k].theta) / dt});
  ref.twists.push_back(ref.twists.back());
  return ref;
}

Pose2 unicycle_step(const Pose2& x, const Twist& u, double dt) {
  return {x.x1 + u.v * std::cos(x.theta) * dt, x.x2 + u.v * std::sin(x.theta) * dt, x.theta + u.w * dt};
}

std::vector<Pose2> rollout(const Pose2& x0, const std::vector<Twist>& controls, double dt) {
  std::vector<Pose2> xs{x0};
  for (const auto& u : controls) xs.push_back(unicycle_step(xs.back(), u, dt));
  return xs;
}

double tracking_cost(const std::vector<Pose2>& states, const std::vector<Twist>& controls,
                     const ReferenceTrajectory& ref, const NmpcConfig& cfg) {
  double c = 0.0;
  for (int k = 0; k < cfg.N; ++k) {
    const Pose2& x = states[k];
    const Pose2& r = ref.poses[k];
    const double e1 = x.x1 - r.x1, e2 = x.x2 - r.x2, e3 = normalize_angle(x.theta - r.theta);
    c += cfg.Q(0) * e1 * e1 + cfg.Q(1) * e2 * e2 + cfg.Q(2) * e3 * e3;
    const double dv = controls[k].v - ref.twists[k].v, dw = controls[k].w - ref.twists[k].w;
    c += cfg.R(0) * dv * dv + cfg.R(1) * dw * dw;
  }
  return c;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd pack(const std::vector<Twist>& u) {
  VectorXd z(2 * u.size());
  for (std::size_t k = 0; k < u.size(); ++k) z.segment<2>(2 * k) << u[k].v, u[k].w;
  return z;
}

std::vector<Twist> unpack(const VectorXd& z) {
  std::vector<Twist> u(z.size() / 2);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = {z(2 * k), z(2 * k + 1)};
  return u;
}

Twist clamp_box(const Twist& u, const NmpcConfig& cfg) {
  return {std::clamp(u.v, cfg.u_lb.v, cfg.u_ub.v), std::clamp(u.w, cfg.u_lb.w, cfg.u_ub.w)};
}

std::vector<Twist> project_feasible(std::vector<Twist> u, Twist prev, const NmpcConfig& cfg) {
  for (auto& uk : u) {
    const double v_lo = std::max(cfg.u_lb.v, prev.v - cfg.a_ub.v), v_hi = std::min(cfg.u_ub.v, prev.v + cfg.a_ub.v);
    const double w_lo = std::max(cfg.u_lb.w, prev.w - cfg.a_ub.w), w_hi = std::min(cfg.u_ub.w, prev.w + cfg.a_ub.w);
    uk.v = v_lo <= v_hi ? std::clamp(uk.v, v_lo, v_hi) : std::clamp(uk.v, cfg.u_lb.v, cfg.u_ub.v);
    uk.w = w_lo <= w_hi ? std::clamp(uk.w, w_lo, w_hi) : std::clamp(uk.w, cfg.u_lb.w, cfg.u_ub.w);
    prev = uk;
  }
  return u;
}

struct Linearization {
  VectorXd residual;
  MatrixXd J;                 // d residual / dz
  std::vector<MatrixXd> Sp;   // d position_k / dz, k = 0..N
  std::vector<Pose2> states;
};

Linearization linearize(const Pose2& x0, const VectorXd& z, const ReferenceTrajectory& ref, const NmpcConfig& cfg) {
  const int N = cfg.N, nz = 2 * N;
  Linearization lin;
  lin.states = rollout(x0, unpack(z), cfg.dt);
  std::vector<MatrixXd> S(N + 1, MatrixXd::Zero(3, nz));
  for (int k = 0; k < N; ++k) {
    const Pose2& x = lin.states[k];
    const double v = z(2 * k), c = std::cos(x.theta), s = std::sin(x.theta);
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    A(0, 2) = -cfg.dt * v * s;
    A(1, 2) = cfg.dt * v * c;
    S[k + 1] = A * S[k];
    S[k + 1](0, 2 * k) += cfg.dt * c;
    S[k + 1](1, 2 * k) += cfg.dt * s;
    S[k + 1](2, 2 * k + 1) += cfg.dt;
  }
  const int nr = 3 * (N - 1) + 2 * N;
  lin.residual = VectorXd::Zero(nr);
  lin.J = MatrixXd::Zero(nr, nz);
  const Eigen::Vector3d sq = cfg.Q.cwiseMax(0.0).cwiseSqrt();
  const Eigen::Vector2d sr = cfg.R.cwiseMax(0.0).cwiseSqrt();
  int row = 0;
  for (int k = 1; k < N; ++k) {
    const Pose2& x = lin.states[k];
    const Pose2& r = ref.poses[k];
    const Eigen::Vector3d e(x.x1 - r.x1, x.x2 - r.x2, normalize_angle(x.theta - r.theta));
    lin.residual.segment<3>(row) = sq.cwiseProduct(e);
    lin.J.middleRows<3>(row) = sq.asDiagonal() * S[k];
    row += 3;
  }
  for (int k = 0; k < N; ++k) {
    lin.residual(row) = sr(0) * (z(2 * k) - ref.twists[k].v);
    lin.residual(row + 1) = sr(1) * (z(2 * k + 1) - ref.twists[k].w);
    lin.J(row, 2 * k) = sr(0);
    lin.J(row + 1, 2 * k + 1) = sr(1);
    row += 2;
  }
  lin.Sp.resize(N + 1);
  for (int k = 0; k <= N; ++k) lin.Sp[k] = S[k].topRows<2>();
  return lin;
}

double violation(const std::vector<Pose2>& states, const ZbfModel* zbf) {
  if (!zbf) return 0.0;
  double v = 0.0;
  for (std::size_t k = 1; k < states.size(); ++k) v += std::max(0.0, -eval(*zbf, states[k].position()));
  return v;
}

}  // namespace

NmpcSolution solve(const Pose2& x0, const Twist& u_prev_in, const ReferenceTrajectory& ref_window, const ZbfModel* zbf,
                   const NmpcConfig& cfg, const NmpcSolution* warm) {
  if (cfg.N < 1) throw std::invalid_argument("nmpc solve: horizon must be positive");
  if (ref_window.poses.size() < std::size_t(cfg.N) || ref_window.twists.size() < std::size_t(cfg.N))
    throw std::invalid_argument("nmpc solve: reference window shorter than the horizon");
  if (!std::isfinite(x0.x1) || !std::isfinite(x0.x2) || !std::isfinite(x0.theta) || !std::isfinite(u_prev_in.v) ||
      !std::isfinite(u_prev_in.w))
    throw std::invalid_argument("nmpc solve: non-finite input");

  const int N = cfg.N, nz = 2 * N;
  const Twist u_prev = clamp_box(u_prev_in, cfg);

  std::vector<Twist> guess;
  if (warm && int(warm->controls.size()) == N) {
    for (int k = 0; k < N; ++k) guess.push_back(warm->controls[std::min(k + 1, N - 1)]);
  } else {
    for (int k = 0; k < N; ++k) guess.push_back(ref_window.twists[k]);
  }
  VectorXd z = pack(project_feasible(guess, u_prev, cfg));

  auto merit = [&](const VectorXd& zz, double* viol_out = nullptr) {
    const auto u = unpack(zz);
    const auto xs = rollout(x0, u, cfg.dt);
    const double viol = violation(xs, zbf);
    if (viol_out) *viol_out = viol;
    return tracking_cost(xs, u, ref_window, cfg) + cfg.slack_penalty * viol;
  };

  VectorXd lb(nz), ub(nz), amax(nz);
  for (int k = 0; k < N; ++k) {
    lb.segment<2>(2 * k) << cfg.u_lb.v, cfg.u_lb.w;
    ub.segment<2>(2 * k) << cfg.u_ub.v, cfg.u_ub.w;
    amax.segment<2>(2 * k) << cfg.a_ub.v, cfg.a_ub.w;
  }
  const VectorXd zprev = (VectorXd(2) << u_prev.v, u_prev.w).finished();

  NmpcSolution sol;
  double rho = cfg.trust_radius;
  bool converged = false;
  for (int it = 0; it < cfg.max_iters && !converged; ++it) {
    sol.iterations = it + 1;
    const Linearization lin = linearize(x0, z, ref_window, cfg);
    const MatrixXd H = 2.0 * lin.J.transpose() * lin.J + 1e-8 * MatrixXd::Identity(nz, nz);
    const VectorXd grad = 2.0 * lin.J.transpose() * lin.residual;

    // Box + trust region, rates, then barrier rows.
    const int n_h = zbf ? N : 0;
    const int rows = 2 * nz + 2 * nz + n_h;
    MatrixXd A = MatrixXd::Zero(rows, nz);
    VectorXd b(rows);
    int r = 0;
    for (int i = 0; i < nz; ++i) {
      A(r, i) = 1.0;
      b(r++) = std::max(lb(i) - z(i), -rho);
      A(r, i) = -1.0;
      b(r++) = -std::min(ub(i) - z(i), rho);
    }
    for (int k = 0; k < N; ++k) {
      for (int c = 0; c < 2; ++c) {
        const int i = 2 * k + c;
        const double base = z(i) - (k == 0 ? zprev(c) : z(i - 2));
        // -a <= base + d_i - d_{i-2} <= a
        A(r, i) = 1.0;
        if (k > 0) A(r, i - 2) = -1.0;
        b(r++) = -amax(i) - base;
        A(r, i) = -1.0;
        if (k > 0) A(r, i - 2) = 1.0;
        b(r++) = base - amax(i);
      }
    }
    VectorXd hval(n_h);
    for (int k = 1; k <= n_h; ++k) {
      const Vec2 p = lin.states[k].position();
      hval(k - 1) = eval(*zbf, p);
      A.row(r) = gradient(*zbf, p).transpose() * lin.Sp[k];
      b(r++) = -hval(k - 1);
    }

    DenseQp qp{H, grad, MatrixXd(0, nz), VectorXd(0), A, b};
    QpSolution qs = solve_dense_qp(qp);
    VectorXd step;
    double lin_viol = 0.0;
    if (qs.status == QpStatus::optimal) {
      step = qs.x;
    } else {
      // Soften the barrier rows only.
      const int ns = n_h;
      MatrixXd Gs = MatrixXd::Zero(nz + ns, nz + ns);
      Gs.topLeftCorner(nz, nz) = H;
      Gs.bottomRightCorner(ns, ns) = 1e-2 * MatrixXd::Identity(ns, ns);
      VectorXd gs(nz + ns);
      gs << grad, VectorXd::Constant(ns, cfg.slack_penalty);
      MatrixXd As = MatrixXd::Zero(rows + ns, nz + ns);
      As.topLeftCorner(rows, nz) = A;
      VectorXd bs(rows + ns);
      bs << b, VectorXd::Zero(ns);
      for (int k = 0; k < ns; ++k) {
        As(rows - ns + k, nz + k) = 1.0;
        As(rows + k, nz + k) = 1.0;
      }
      qs = solve_dense_qp({Gs, gs, MatrixXd(0, nz + ns), VectorXd(0), As, bs});
      if (qs.status != QpStatus::optimal) break;
      step = qs.x.head(nz);
      lin_viol = qs.x.tail(ns).sum();
    }

    double viol = 0.0;
    const double phi0 = merit(z, &viol);
    if (step.lpNorm<Eigen::Infinity>() <= cfg.tol) {
      converged = viol <= 1e-6;
      if (!converged) break;
      continue;
    }
    const double D = grad.dot(step) - cfg.slack_penalty * std::max(0.0, viol - lin_viol);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, alpha *= 0.5) {
      const VectorXd trial = z + alpha * step;
      if (merit(trial) <= phi0 + 1e-4 * alpha * std::min(D, 0.0)) {
        z = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rho *= 0.25;
      if (rho < 1e-8) break;
    } else if (alpha == 1.0) {
      rho = std::min(cfg.trust_radius, 2.0 * rho);
    }
  }

  for (int i = 0; i < nz; ++i) z(i) = std::clamp(z(i), lb(i), ub(i));
  sol.controls = unpack(z);
  sol.predicted_states = rollout(x0, sol.controls, cfg.dt);
  sol.cost = tracking_cost(sol.predicted_states, sol.controls, ref_window, cfg);
  const double viol = violation(sol.predicted_states, zbf);
  double worst = 0.0;
  if (zbf)
    for (int k = 1; k <= N; ++k) worst = std::max(worst, -eval(*zbf, sol.predicted_states[k].position()));
  if (worst > 1e-6 || viol > 1e-6) sol.status = NmpcStatus::infeasible_relaxed;
  else sol.status = converged ? NmpcStatus::converged : NmpcStatus::max_iters;
  return sol;
}

}  // namespace gapnav
