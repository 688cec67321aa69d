#include "gapnav/sim/global_planner.hpp"

#include <cmath>
#include <limits>
#include <queue>

namespace gapnav::sim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

GlobalPlanner::GlobalPlanner(const World& w, double inflation, double resolution)
    : lo_(w.bounds.lo), goal_(w.goal), res_(resolution) {
  if (!(resolution > 0.0)) throw WorldError("GlobalPlanner: resolution must be positive");
  const Vec2 ext = w.bounds.hi - w.bounds.lo;
  nx_ = long(std::ceil(ext.x() / res_));
  ny_ = long(std::ceil(ext.y() / res_));
  occupied_.assign(nx_ * ny_, 0);
  for (long j = 0; j < ny_; ++j)
    for (long i = 0; i < nx_; ++i) occupied_[index(i, j)] = clearance(w, center(i, j)) < inflation;

  cost_.assign(nx_ * ny_, kInf);
  long gi, gj;
  if (!cell_of(goal_, gi, gj) || occupied_[index(gi, gj)]) return;
  using Item = std::pair<double, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  cost_[index(gi, gj)] = 0.0;
  open.push({0.0, index(gi, gj)});
  while (!open.empty()) {
    const auto [c, id] = open.top();
    open.pop();
    if (c > cost_[id]) continue;
    const long i = id % nx_, j = id / nx_;
    for (long dj = -1; dj <= 1; ++dj)
      for (long di = -1; di <= 1; ++di) {
        if (!di && !dj) continue;
        const long ni = i + di, nj = j + dj;
        if (ni < 0 || nj < 0 || ni >= nx_ || nj >= ny_ || occupied_[index(ni, nj)]) continue;
        // No corner cutting.
        if (di && dj && (occupied_[index(i + di, j)] || occupied_[index(i, j + dj)])) continue;
        const double nc = c + res_ * ((di && dj) ? std::sqrt(2.0) : 1.0);
        if (nc < cost_[index(ni, nj)]) {
          cost_[index(ni, nj)] = nc;
          open.push({nc, index(ni, nj)});
        }
      }
  }
}

bool GlobalPlanner::cell_of(const Vec2& p, long& i, long& j) const {
  i = long(std::floor((p.x() - lo_.x()) / res_));
  j = long(std::floor((p.y() - lo_.y()) / res_));
  return i >= 0 && j >= 0 && i < nx_ && j < ny_;
}

Vec2 GlobalPlanner::center(long i, long j) const { return lo_ + res_ * Vec2(i + 0.5, j + 0.5); }

bool GlobalPlanner::free(const Vec2& p) const {
  long i, j;
  return cell_of(p, i, j) && !occupied_[index(i, j)];
}

double GlobalPlanner::cost_to_go(const Vec2& p) const {
  long i, j;
  return cell_of(p, i, j) ? cost_[index(i, j)] : kInf;
}

bool GlobalPlanner::line_of_sight(const Vec2& a, const Vec2& b) const {
  const double len = (b - a).norm();
  const int n = std::max(1, int(std::ceil(len / (0.25 * res_))));
  for (int k = 0; k <= n; ++k) {
    const Vec2 p = a + (b - a) * (double(k) / n);
    if ((p - a).norm() < res_) continue;  // the robot's own cell may touch the inflation
    if (!free(p)) return false;
  }
  return true;
}

std::optional<long> GlobalPlanner::nearest_free(const Vec2& p) const {
  long i0, j0;
  if (!cell_of(p, i0, j0)) return std::nullopt;
  std::optional<long> best;
  double best_d = kInf;
  for (long r = 0; r <= 5 && !best; ++r)
    for (long j = j0 - r; j <= j0 + r; ++j)
      for (long i = i0 - r; i <= i0 + r; ++i) {
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_ || !std::isfinite(cost_[index(i, j)])) continue;
        const double d = (center(i, j) - p).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = index(i, j);
        }
      }
  return best;
}

std::vector<Vec2> GlobalPlanner::path(const Vec2& from) const {
  const auto start = nearest_free(from);
  if (!start) return {};
  std::vector<Vec2> out;
  long id = *start;
  while (cost_[id] > 0.0) {
    const long i = id % nx_, j = id / nx_;
    out.push_back(center(i, j));
    long next = id;
    double best = cost_[id];
    for (long dj = -1; dj <= 1; ++dj)
      for (long di = -1; di <= 1; ++di) {
        const long ni = i + di, nj = j + dj;
        if ((!di && !dj) || ni < 0 || nj < 0 || ni >= nx_ || nj >= ny_) continue;
        if (di && dj && (occupied_[index(i + di, j)] || occupied_[index(i, j + dj)])) continue;
        const double c = cost_[index(ni, nj)];
        if (c < best) {
          best = c;
          next = index(ni, nj);
        }
      }
    if (next == id) return {};
    id = next;
  }
  out.push_back(goal_);
  return out;
}

std::optional<Vec2> GlobalPlanner::waypoint(const Vec2& position, double horizon) const {
  const auto p = path(position);
  if (p.empty()) return std::nullopt;
  const double dist = (goal_ - position).norm();
  if (line_of_sight(position, goal_))
    return dist <= horizon ? goal_ : Vec2(position + (goal_ - position) * (horizon / dist));
  Vec2 best = p.front();
  for (const auto& q : p) {
    if ((q - position).norm() > horizon) break;
    if (line_of_sight(position, q)) best = q;
  }
  return best;
}

}  // namespace gapnav::sim
