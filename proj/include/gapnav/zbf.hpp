#pragma once

#include "gapnav/gaps.hpp"
#include "gapnav/geometry.hpp"

#include <json.hpp>

#include <array>
#include <stdexcept>
#include <vector>

namespace gapnav {

class ZbfError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kZbfFeatures = 15;
using ZbfFeatures = Eigen::Matrix<double, kZbfFeatures, 1>;
using ZbfJacobian = Eigen::Matrix<double, kZbfFeatures, 2>;

/// c.x + d, positive on the interior side; ||c|| = 1 for active lines.
struct LineCoef {
  Vec2 c = Vec2::Zero();
  double d = 1.0;
  double operator()(const Vec2& x) const { return c.dot(x) + d; }
};

struct ZbfGeometry {
  std::array<LineCoef, 5> lines;
  std::array<bool, 5> active{false, false, false, false, false};
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
};

struct ZbfModel {
  ZbfGeometry geometry;
  ZbfFeatures alphas = ZbfFeatures::Zero();
  double b = 0.0;
  /// Trained through the soft-margin fallback.
  bool degraded = false;
};

struct SampleSet {
  std::vector<Vec2> unsafe;
  std::vector<Vec2> safe;
  double epsilon = 0.0;
};

struct ZbfOptions {
  double epsilon_fraction = 0.03;  // of the inflated circle radius
  double spacing = 0.0;            // 0 selects max(perimeter / 200, epsilon)
  double margin = 1.0;
  double slack_weight = 1e3;
};

/// Lines 1/2 support the inflated sides, line 3 joins the arc points. Lines 4/5 stay
/// inactive for the quadrilateral keyholes produced by the gap pipeline; inactive
/// lines evaluate to the constant 1.
ZbfGeometry build_lines(const InflatedKeyhole& k);

/// [R1, R2, R3, Rc, R1R2, RcR1, RcR2, RcR3, R1R2R3, R1R4R5, R2R4R5, RcR1R4, RcR2R4, RcR1R2, RcR1R2R3]
ZbfFeatures features(const Vec2& x, const ZbfGeometry& g);

/// Features and their subgradient (ReLU'(0) = 0).
ZbfFeatures features(const Vec2& x, const ZbfGeometry& g, ZbfJacobian& jac);

double boundary_length(const InflatedKeyhole& k);

SampleSet sample_boundary(const InflatedKeyhole& k, double epsilon, double spacing);

/// min 1'alpha s.t. h <= -margin on unsafe, h >= margin on safe, alpha >= 0, b <= 0.
ZbfModel train(const SampleSet& samples, const ZbfGeometry& g, const ZbfOptions& opt = {});

/// build_lines + sample_boundary + train with default sampling.
ZbfModel fit_zbf(const InflatedKeyhole& k, const ZbfOptions& opt = {});

double eval(const ZbfModel& m, const Vec2& x);
Vec2 gradient(const ZbfModel& m, const Vec2& x);

nlohmann::json to_json(const ZbfModel& m);
ZbfModel zbf_from_json(const nlohmann::json& j);

}  // namespace gapnav
