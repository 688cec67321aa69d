#pragma once
// Reference implementations used only by tests. Each one is written differently from
// the library code it checks (brute force, textbook algorithm, or closed form).

#include "gapnav/geometry.hpp"
#include "gapnav/gaps.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <vector>

namespace oracle {

using gapnav::Vec2;

// de Casteljau, independent of the Bernstein sum in the library.
template <std::size_t N>
Vec2 de_casteljau(std::array<Vec2, N> p, double u) {
  for (std::size_t r = 1; r < N; ++r)
    for (std::size_t i = 0; i + r < N; ++i) p[i] = (1.0 - u) * p[i] + u * p[i + 1];
  return p[0];
}

// Convex hull membership via half-planes of the raw vertex list (any orientation).
inline bool in_convex(const std::vector<Vec2>& v, const Vec2& x, double tol) {
  if (v.size() < 3) return false;
  double area = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    area += a.x() * b.y() - a.y() * b.x();
  }
  const double s = area > 0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    const Vec2 e = b - a;
    const double c = s * (e.x() * (x.y() - a.y()) - e.y() * (x.x() - a.x())) / e.norm();
    if (c < -tol) return false;
  }
  return true;
}

inline bool in_region(const std::vector<Vec2>& poly, const Vec2& center, double r, const Vec2& x, double tol) {
  return (x - center).norm() <= r + tol || in_convex(poly, x, tol);
}

inline bool in_keyhole(const gapnav::Keyhole& k, const Vec2& x, double tol) {
  return in_region(k.polygon.vertices(), k.circle.center, k.circle.radius, x, tol);
}

// The region a keyhole barrier describes: the mouth between the gap points is left open,
// so past it the band between the two side lines continues.
inline bool in_open_keyhole(const gapnav::Keyhole& k, const Vec2& x, double tol) {
  if ((x - k.circle.center).norm() <= k.circle.radius + tol) return true;
  if (!k.has_polygon()) return false;
  const Vec2 inside = k.polygon.centroid();
  auto same_side = [&](const Vec2& a, const Vec2& b) {
    const Vec2 n(a.y() - b.y(), b.x() - a.x());
    const double s = n.dot(inside - a) > 0 ? 1.0 : -1.0;
    return s * n.dot(x - a) / n.norm() >= -tol;
  };
  return same_side(k.side_left.a, k.side_left.b) && same_side(k.side_right.a, k.side_right.b) &&
         same_side(k.arc_left, k.arc_right);
}

// Minimizer of |u - ur|^2 over a grid on the box with  g.u >= -gamma*h. With
// `with_boundary` the candidates also include the points where the constraint line
// crosses the grid lines, so the boundary is sampled at the grid resolution too.
inline std::optional<Vec2> cbf_grid(const Vec2& ur, double h, const Vec2& g, double gamma, double bound, double res,
                                    bool with_boundary = false) {
  std::optional<Vec2> best;
  double best_d = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec2& u) {
    if (std::abs(u.x()) > bound + 1e-12 || std::abs(u.y()) > bound + 1e-12) return;
    if (g.dot(u) < -gamma * h - 1e-12) return;
    const double d = (u - ur).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = u;
    }
  };
  const int n = int(std::round(2 * bound / res));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) consider(Vec2(-bound + i * res, -bound + j * res));
  if (with_boundary)
    for (int i = 0; i <= n; ++i) {
      const double t = -bound + i * res;
      // g.u = -gamma*h at u.x = t, then at u.y = t; nudged onto the feasible side.
      if (std::abs(g.y()) > 1e-12) {
        Vec2 u(t, (-gamma * h - g.x() * t) / g.y());
        consider(u + 1e-13 * g.normalized());
      }
      if (std::abs(g.x()) > 1e-12) {
        Vec2 u((-gamma * h - g.y() * t) / g.x(), t);
        consider(u + 1e-13 * g.normalized());
      }
    }
  return best;
}

// Textbook A* with a Euclidean heuristic on a boolean grid (8-connected, no corner cutting).
inline double astar_length(const std::vector<std::vector<bool>>& occ, int si, int sj, int gi, int gj, double res) {
  const int nx = int(occ.size()), ny = int(occ[0].size());
  auto h = [&](int i, int j) { return res * std::hypot(i - gi, j - gj); };
  std::vector<double> g(nx * ny, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  g[si * ny + sj] = 0.0;
  open.push({h(si, sj), si * ny + sj});
  while (!open.empty()) {
    const auto [f, id] = open.top();
    open.pop();
    const int i = id / ny, j = id % ny;
    if (i == gi && j == gj) return g[id];
    if (f > g[id] + h(i, j) + 1e-12) continue;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        if (!di && !dj) continue;
        const int a = i + di, b = j + dj;
        if (a < 0 || b < 0 || a >= nx || b >= ny || occ[a][b]) continue;
        if (di && dj && (occ[i + di][j] || occ[i][j + dj])) continue;
        const double ng = g[id] + res * ((di && dj) ? std::sqrt(2.0) : 1.0);
        if (ng < g[a * ny + b]) {
          g[a * ny + b] = ng;
          open.push({ng + h(a, b), a * ny + b});
        }
      }
  }
  return std::numeric_limits<double>::infinity();
}

// Brute-force LP  min c'x, Ax <= b, x >= 0  over all vertices (tiny problems only).
inline std::optional<double> lp_vertices(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int m = int(A.rows()), n = int(A.cols());
  // Stack x >= 0 as -x <= 0.
  Eigen::MatrixXd G(m + n, n);
  G << A, -Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd hv(m + n);
  hv << b, Eigen::VectorXd::Zero(n);
  const int rows = m + n;
  std::optional<double> best;
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd M(n, n);
      Eigen::VectorXd r(n);
      for (int k = 0; k < n; ++k) {
        M.row(k) = G.row(pick[k]);
        r(k) = hv(pick[k]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd x = lu.solve(r);
      if (((G * x - hv).array() > 1e-9).any()) return;
      const double v = c.dot(x);
      if (!best || v < *best) best = v;
      return;
    }
    for (int i = start; i < rows; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Small convex QP  min 1/2 x'Gx + g'x,  Ain x >= bin  by enumerating active sets.
inline std::optional<Eigen::VectorXd> qp_enumerate(const Eigen::MatrixXd& G, const Eigen::VectorXd& g,
                                                   const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int n = int(G.rows()), m = int(A.rows());
  std::optional<Eigen::VectorXd> best;
  double best_f = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (mask >> i & 1) act.push_back(i);
    if (int(act.size()) > n) continue;
    const int k = int(act.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd r(n + k);
    K.topLeftCorner(n, n) = G;
    r.head(n) = -g;
    for (int a = 0; a < k; ++a) {
      K.block(0, n + a, n, 1) = -A.row(act[a]).transpose();
      K.block(n + a, 0, 1, n) = A.row(act[a]);
      r(n + a) = b(act[a]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd s = lu.solve(r);
    const Eigen::VectorXd x = s.head(n);
    if (((A * x - b).array() < -1e-9).any()) continue;
    if (k && (s.tail(k).array() < -1e-9).any()) continue;
    const double f = 0.5 * x.dot(G * x) + g.dot(x);
    if (f < best_f) {
      best_f = f;
      best = x;
    }
  }
  return best;
}

}  // namespace oracle
