#pragma once

#include "gapnav/geometry.hpp"
#include "gapnav/sim/world.hpp"

#include <map>
#include <utility>

namespace gapnav::sim {

struct SensorConfig {
  /// Beams over the full circle; a limited FoV uses the subset within fov/2 of the heading.
  int n_beams = 512;
  double fov = 2.0 * std::numbers::pi;
  double max_range = 5.0;
  Pose2 mount_offset;
};

/// Robot-frame egocircle (angle_min = -pi). Out-of-FoV beams read max_range.
EgoCircle raycast_scan(const World& w, const Pose2& pose, const SensorConfig& s);

bool in_fov(double robot_frame_angle, const SensorConfig& s);

/// World-frame memory of every beam endpoint observed so far. Used to fill the
/// out-of-FoV part of limited-FoV scans; the world is static so entries never expire.
class ScanMemory {
 public:
  explicit ScanMemory(double cell = 0.02) : cell_(cell) {}

  void observe(const EgoCircle& scan, const Pose2& sensor_pose, const SensorConfig& s);
  EgoCircle fill(const EgoCircle& scan, const Pose2& sensor_pose, const SensorConfig& s) const;
  std::size_t size() const { return points_.size(); }

 private:
  double cell_;
  std::map<std::pair<long, long>, Vec2> points_;
};

}  // namespace gapnav::sim
