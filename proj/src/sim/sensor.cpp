#include "gapnav/sim/sensor.hpp"

#include <cmath>
#include <stdexcept>

namespace gapnav::sim {

namespace {

double increment(const SensorConfig& s) { return 2.0 * std::numbers::pi / s.n_beams; }

void validate(const SensorConfig& s) {
  if (s.n_beams < 8) throw std::invalid_argument("sensor: n_beams must be at least 8");
  if (!(s.fov > 0.0) || s.fov > 2.0 * std::numbers::pi + 1e-12) throw std::invalid_argument("sensor: fov out of range");
  if (!(s.max_range > 0.0)) throw std::invalid_argument("sensor: max_range must be positive");
}

}  // namespace

bool in_fov(double robot_frame_angle, const SensorConfig& s) {
  if (s.fov >= 2.0 * std::numbers::pi - 1e-12) return true;
  return std::abs(normalize_angle(robot_frame_angle)) <= 0.5 * s.fov + 1e-12;
}

EgoCircle raycast_scan(const World& w, const Pose2& pose, const SensorConfig& s) {
  validate(s);
  const Pose2 sensor = pose.to_world(s.mount_offset);
  const double inc = increment(s);
  std::vector<double> ranges(s.n_beams, s.max_range);
  for (int i = 0; i < s.n_beams; ++i) {
    const double a = -std::numbers::pi + i * inc;
    if (!in_fov(a, s)) continue;
    ranges[i] = std::clamp(raycast(w, sensor.position(), sensor.theta + a, s.max_range), 1e-3, s.max_range);
  }
  return EgoCircle(std::move(ranges), -std::numbers::pi, inc, s.max_range);
}

void ScanMemory::observe(const EgoCircle& scan, const Pose2& sensor_pose, const SensorConfig& s) {
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (scan.is_max(i) || !in_fov(scan.angle(i), s)) continue;
    const Vec2 p = sensor_pose.to_world(beam_point(scan, i));
    points_.emplace(std::make_pair(long(std::floor(p.x() / cell_)), long(std::floor(p.y() / cell_))), p);
  }
}

EgoCircle ScanMemory::fill(const EgoCircle& scan, const Pose2& sensor_pose, const SensorConfig& s) const {
  if (s.fov >= 2.0 * std::numbers::pi - 1e-12) return scan;
  std::vector<double> ranges = scan.ranges();
  const double inc = scan.angle_increment();
  const auto n = long(scan.size());
  for (const auto& [key, p] : points_) {
    const Vec2 local = sensor_pose.to_local(p);
    const double r = local.norm();
    if (r >= s.max_range || r < 1e-3) continue;
    long i = std::lround((bearing(local) - scan.angle_min()) / inc) % n;
    if (i < 0) i += n;
    if (in_fov(scan.angle(std::size_t(i)), s)) continue;
    ranges[i] = std::min(ranges[i], r);
  }
  return EgoCircle(std::move(ranges), scan.angle_min(), inc, s.max_range);
}

}  // namespace gapnav::sim
