#include "gapnav/zbf.hpp"

#include "gapnav/lp.hpp"

#include <algorithm>
#include <cmath>

namespace gapnav {

ZbfGeometry build_lines(const InflatedKeyhole& k) {
  ZbfGeometry g;
  g.center = k.circle.center;
  g.radius = k.circle.radius;
  if (!(g.radius > 0.0)) throw ZbfError("build_lines: non-positive circle radius");
  if (!k.has_polygon()) return g;

  const Vec2 inside = k.polygon.centroid();
  auto line = [&](const Vec2& a, const Vec2& b) {
    if ((b - a).norm() < 1e-12) throw ZbfError("build_lines: degenerate side");
    const Line l = Line::through(a, b).oriented_toward(inside);
    return LineCoef{l.n, l.d};
  };
  g.lines[0] = line(k.side_left.a, k.side_left.b);
  g.lines[1] = line(k.side_right.a, k.side_right.b);
  g.lines[2] = line(k.arc_left, k.arc_right);
  g.active = {true, true, true, false, false};
  return g;
}

namespace {

struct Relu {
  double v;
  Vec2 dv;
};

Relu relu_line(const LineCoef& l, bool active, const Vec2& x) {
  if (!active) return {1.0, Vec2::Zero()};
  const double z = l(x);
  return z > 0.0 ? Relu{z, l.c} : Relu{0.0, Vec2::Zero()};
}

Relu relu_circle(const ZbfGeometry& g, const Vec2& x) {
  const Vec2 rel = x - g.center;
  const double z = g.radius * g.radius - rel.squaredNorm();
  return z > 0.0 ? Relu{z, -2.0 * rel} : Relu{0.0, Vec2::Zero()};
}

template <bool WithJac>
ZbfFeatures compute(const Vec2& x, const ZbfGeometry& g, ZbfJacobian* jac) {
  std::array<Relu, 5> R;
  for (int i = 0; i < 5; ++i) R[i] = relu_line(g.lines[i], g.active[i], x);
  const Relu Rc = relu_circle(g, x);
  const Relu* terms[15][4] = {
      {&R[0]}, {&R[1]}, {&R[2]}, {&Rc},
      {&R[0], &R[1]}, {&Rc, &R[0]}, {&Rc, &R[1]}, {&Rc, &R[2]},
      {&R[0], &R[1], &R[2]}, {&R[0], &R[3], &R[4]}, {&R[1], &R[3], &R[4]},
      {&Rc, &R[0], &R[3]}, {&Rc, &R[1], &R[3]}, {&Rc, &R[0], &R[1]},
      {&Rc, &R[0], &R[1], &R[2]},
  };
  ZbfFeatures f;
  for (int k = 0; k < kZbfFeatures; ++k) {
    double v = 1.0;
    Vec2 dv = Vec2::Zero();
    for (const Relu* r : terms[k]) {
      if (!r) break;
      if constexpr (WithJac) dv = dv * r->v + v * r->dv;
      v *= r->v;
    }
    f(k) = v;
    if constexpr (WithJac) jac->row(k) = dv.transpose();
  }
  return f;
}

}  // namespace

ZbfFeatures features(const Vec2& x, const ZbfGeometry& g) { return compute<false>(x, g, nullptr); }

ZbfFeatures features(const Vec2& x, const ZbfGeometry& g, ZbfJacobian& jac) { return compute<true>(x, g, &jac); }

double eval(const ZbfModel& m, const Vec2& x) { return m.alphas.dot(features(x, m.geometry)) + m.b; }

Vec2 gradient(const ZbfModel& m, const Vec2& x) {
  ZbfJacobian jac;
  features(x, m.geometry, jac);
  return jac.transpose() * m.alphas;
}

namespace {

// CCW angle from the left arc point to the right one, i.e. the gap-facing arc.
double excluded_span(const InflatedKeyhole& k) {
  if (!k.has_polygon()) return 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  const double a = bearing(k.arc_left - k.circle.center);
  const double b = bearing(k.arc_right - k.circle.center);
  return std::fmod(b - a + two_pi, two_pi);
}

}  // namespace

double boundary_length(const InflatedKeyhole& k) {
  double len = k.circle.radius * (2.0 * std::numbers::pi - excluded_span(k));
  if (k.has_polygon()) len += k.side_left.length() + k.side_right.length();
  return len;
}

SampleSet sample_boundary(const InflatedKeyhole& k, double epsilon, double spacing) {
  if (!(epsilon > 0.0) || !(spacing > 0.0)) throw ZbfError("sample_boundary: epsilon and spacing must be positive");
  if (spacing >= boundary_length(k)) throw ZbfError("sample_boundary: spacing exceeds the boundary length");
  if (epsilon >= k.circle.radius) throw ZbfError("sample_boundary: epsilon exceeds the circle radius");
  SampleSet s;
  s.epsilon = epsilon;
  const Vec2 c = k.circle.center;
  const double r = k.circle.radius;

  const double span = excluded_span(k);
  if (!k.has_polygon()) {
    const auto n = std::size_t(std::ceil(2.0 * std::numbers::pi * r / spacing));
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 u = unit_vector(2.0 * std::numbers::pi * double(i) / double(n));
      s.unsafe.push_back(c + r * u);
      s.safe.push_back(c + (r - epsilon) * u);
    }
    return s;
  }

  // Circle from the right arc point counter-clockwise around to the left one.
  const double start = bearing(k.arc_right - c);
  const double sweep = 2.0 * std::numbers::pi - span;
  const auto n_arc = std::max<std::size_t>(1, std::size_t(std::ceil(r * sweep / spacing)));
  for (std::size_t i = 0; i <= n_arc; ++i) {
    const Vec2 u = unit_vector(start + sweep * double(i) / double(n_arc));
    s.unsafe.push_back(c + r * u);
    s.safe.push_back(c + (r - epsilon) * u);
  }

  const Vec2 inside = k.polygon.centroid();
  for (const Segment& side : {k.side_left, k.side_right}) {
    const Vec2 n = Line::through(side.a, side.b).oriented_toward(inside).n;
    const auto n_side = std::max<std::size_t>(1, std::size_t(std::ceil(side.length() / spacing)));
    // The arc point itself is already a circle sample.
    for (std::size_t i = 0; i < n_side; ++i) {
      const Vec2 p = side.at(double(i) / double(n_side));
      const Vec2 q = p + epsilon * n;
      if (!k.contains(q, 0.0)) continue;  // corner at the gap point
      s.unsafe.push_back(p);
      s.safe.push_back(q);
    }
  }
  return s;
}

namespace {

// Primal in y = [alpha (scaled), beta = -b]:  min c'y  s.t.  M y <= -margin, y >= 0.
// Solved through its dual  max margin*1'lam  s.t.  -M'lam <= c, lam >= 0 (slack basis
// feasible); y is read off the simplex multipliers.
struct PrimalData {
  Eigen::MatrixXd M;
  Eigen::VectorXd cost;
  Eigen::VectorXd scale;
};

PrimalData assemble(const SampleSet& s, const ZbfGeometry& g) {
  const int rows = int(s.unsafe.size() + s.safe.size());
  Eigen::MatrixXd phi(rows, kZbfFeatures);
  int r = 0;
  for (const auto& x : s.unsafe) phi.row(r++) = features(x, g).transpose();
  for (const auto& x : s.safe) phi.row(r++) = features(x, g).transpose();

  PrimalData d;
  d.scale = phi.cwiseAbs().colwise().maxCoeff().transpose();
  for (int k = 0; k < kZbfFeatures; ++k)
    if (!(d.scale(k) > 0.0)) d.scale(k) = 1.0;
  d.M.resize(rows, kZbfFeatures + 1);
  const int nu = int(s.unsafe.size());
  for (int i = 0; i < rows; ++i) {
    const double sign = i < nu ? 1.0 : -1.0;
    d.M.row(i).head(kZbfFeatures) = sign * phi.row(i).cwiseQuotient(d.scale.transpose());
    d.M(i, kZbfFeatures) = -sign;
  }
  d.cost = Eigen::VectorXd::Zero(kZbfFeatures + 1);
  d.cost.head(kZbfFeatures) = d.scale.cwiseInverse();
  return d;
}

}  // namespace

ZbfModel train(const SampleSet& samples, const ZbfGeometry& g, const ZbfOptions& opt) {
  if (samples.unsafe.empty() || samples.safe.empty()) throw ZbfError("train: empty sample set");
  if (samples.unsafe.size() != samples.safe.size()) throw ZbfError("train: unmatched sample sets");
  if (!(opt.margin > 0.0)) throw ZbfError("train: margin must be positive");

  const PrimalData d = assemble(samples, g);
  LpProblem dual;
  dual.A = -d.M.transpose();
  dual.b = d.cost;
  dual.c = Eigen::VectorXd::Constant(d.M.rows(), -opt.margin);

  ZbfModel m;
  m.geometry = g;
  LpResult res = solve_lp(dual);
  if (res.status == LpStatus::unbounded) {
    dual.upper = Eigen::VectorXd::Constant(d.M.rows(), opt.slack_weight);
    res = solve_lp(dual);
    m.degraded = true;
  }
  if (res.status != LpStatus::optimal) throw ZbfError("train: LP " + to_string(res.status));

  const Eigen::VectorXd y = (-res.duals).cwiseMax(0.0).array() + 0.0;
  m.alphas = y.head(kZbfFeatures).cwiseQuotient(d.scale);
  m.b = -y(kZbfFeatures);

  if (!m.degraded) {
    const double worst = (d.M * y).maxCoeff() + opt.margin;
    if (worst > 1e-7 * opt.margin) throw ZbfError("train: recovered solution violates the margin");
  }
  return m;
}

ZbfModel fit_zbf(const InflatedKeyhole& k, const ZbfOptions& opt) {
  const ZbfGeometry g = build_lines(k);
  const double eps = opt.epsilon_fraction * k.circle.radius;
  const double spacing = opt.spacing > 0.0 ? opt.spacing : std::max(boundary_length(k) / 200.0, eps);
  return train(sample_boundary(k, eps, spacing), g, opt);
}

nlohmann::json to_json(const ZbfModel& m) {
  nlohmann::json lines = nlohmann::json::array();
  for (int i = 0; i < 5; ++i) {
    const auto& l = m.geometry.lines[i];
    lines.push_back({{"c", {l.c.x(), l.c.y()}}, {"d", l.d}, {"active", m.geometry.active[i]}});
  }
  std::vector<double> alphas(m.alphas.data(), m.alphas.data() + kZbfFeatures);
  return {{"lines", lines},
          {"center", {m.geometry.center.x(), m.geometry.center.y()}},
          {"radius", m.geometry.radius},
          {"alphas", alphas},
          {"b", m.b},
          {"degraded", m.degraded}};
}

ZbfModel zbf_from_json(const nlohmann::json& j) {
  ZbfModel m;
  const auto& lines = j.at("lines");
  if (lines.size() != 5) throw ZbfError("zbf_from_json: expected 5 lines");
  for (int i = 0; i < 5; ++i) {
    const auto& l = lines.at(i);
    m.geometry.lines[i].c = Vec2(l.at("c").at(0).get<double>(), l.at("c").at(1).get<double>());
    m.geometry.lines[i].d = l.at("d").get<double>();
    m.geometry.active[i] = l.at("active").get<bool>();
  }
  m.geometry.center = Vec2(j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>());
  m.geometry.radius = j.at("radius").get<double>();
  const auto alphas = j.at("alphas").get<std::vector<double>>();
  if (alphas.size() != kZbfFeatures) throw ZbfError("zbf_from_json: expected 15 coefficients");
  for (int k = 0; k < kZbfFeatures; ++k) m.alphas(k) = alphas[k];
  m.b = j.at("b").get<double>();
  m.degraded = j.value("degraded", false);
  return m;
}

}  // namespace gapnav
