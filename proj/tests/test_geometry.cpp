#include "gapnav/geometry.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace gapnav;
using std::numbers::pi;

namespace {
bool near(const Vec2& a, const Vec2& b, double tol = 1e-12) { return (a - b).norm() <= tol; }
}  // namespace

TEST_CASE("pose angles normalize into (-pi, pi]") {
  CHECK(Pose2(0, 0, pi).theta == doctest::Approx(pi));
  CHECK(Pose2(0, 0, -pi).theta == doctest::Approx(pi));
  CHECK(Pose2(0, 0, 3 * pi / 2).theta == doctest::Approx(-pi / 2));
  const Pose2 f(1, 2, pi / 2);
  CHECK(near(f.to_world(Vec2(1, 0)), Vec2(1, 3)));
  CHECK(near(f.to_local(f.to_world(Vec2(0.3, -0.7))), Vec2(0.3, -0.7)));
}

TEST_CASE("beam_point") {
  const EgoCircle s({2, 3, 4, 5, 6, 7, 8, 9}, 0.0, pi / 2, 10);
  CHECK(near(beam_point(s, 0), Vec2(2, 0)));
  CHECK(near(beam_point(s, 1), Vec2(0, 3), 1e-12));
  const EgoCircle t({std::sqrt(2.0), 1, 1, 1, 1, 1, 1, 1}, -pi / 4, pi / 4, 10);
  CHECK(near(beam_point(t, 0), Vec2(1, -1), 1e-12));
  CHECK_THROWS(beam_point(s, 8));

  // atan2 of every beam point recovers its angle.
  std::vector<double> r(360, 3.0);
  const EgoCircle u(r, -pi, 2 * pi / 360, 5);
  for (std::size_t i = 1; i < u.size(); ++i) CHECK(bearing(beam_point(u, i)) == doctest::Approx(u.angle(i)).epsilon(1e-12));
}

TEST_CASE("largest_centered_disc") {
  CHECK(largest_centered_disc(EgoCircle(std::vector<double>(8, 4.0), 0, pi / 4, 5)).radius == 4.0);
  CHECK(largest_centered_disc(EgoCircle({3, 1.2, 5, 5, 5, 5, 5, 5}, 0, pi / 4, 5)).radius == 1.2);
  std::vector<double> r(360, 6.0);
  r[123] = 0.5;
  const Disc d = largest_centered_disc(EgoCircle(r, -pi, 2 * pi / 360, 6.0));
  CHECK(d.radius == 0.5);
  CHECK(d.center.norm() == 0.0);
}

TEST_CASE("tangent_points") {
  const Disc unit(Vec2::Zero(), 1.0);
  auto [a, b] = tangent_points(unit, Vec2(2, 0));
  CHECK(near(a, Vec2(0.5, -std::sqrt(3.0) / 2), 1e-12));
  CHECK(near(b, Vec2(0.5, std::sqrt(3.0) / 2), 1e-12));
  auto [c, d] = tangent_points(unit, Vec2(0, 2));
  // Ordered by polar angle about the center.
  CHECK(near(c, Vec2(std::sqrt(3.0) / 2, 0.5), 1e-12));
  CHECK(near(d, Vec2(-std::sqrt(3.0) / 2, 0.5), 1e-12));
  CHECK_THROWS_AS(tangent_points(unit, Vec2(1, 0)), GeometryError);
  CHECK_THROWS_AS(tangent_points(unit, Vec2(0.2, 0)), GeometryError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const Disc disc(Vec2(U(rng), U(rng)), 0.1 + std::abs(U(rng)) / 2);
    Vec2 p(U(rng), U(rng));
    if ((p - disc.center).norm() < disc.radius * 1.01) continue;
    auto [t1, t2] = tangent_points(disc, p);
    CHECK(std::abs((t1 - disc.center).dot(t1 - p)) <= 1e-9);
    CHECK(std::abs((t2 - disc.center).dot(t2 - p)) <= 1e-9);
  }
}

TEST_CASE("segment_disc_intersections") {
  const Disc unit(Vec2::Zero(), 1.0);
  auto a = segment_disc_intersections({Vec2(-2, 0), Vec2(2, 0)}, unit);
  REQUIRE(a.size() == 2);
  CHECK(near(a[0], Vec2(-1, 0)));
  CHECK(near(a[1], Vec2(1, 0)));
  CHECK(segment_disc_intersections({Vec2(0, 2), Vec2(1, 2)}, unit).empty());
  auto c = segment_disc_intersections({Vec2(0, 0), Vec2(2, 0)}, unit);
  REQUIRE(c.size() == 1);
  CHECK(near(c[0], Vec2(1, 0)));
}

TEST_CASE("point_in_region against half-plane brute force") {
  const ConvexPolygon sq({Vec2(1, -1), Vec2(3, -1), Vec2(3, 1), Vec2(1, 1)});
  const Disc disc(Vec2::Zero(), 1.5);
  CHECK(point_in_region(Vec2(0, 0), sq, disc));
  CHECK_FALSE(point_in_region(Vec2(6, 0), sq, disc));
  CHECK(point_in_region(Vec2(3, 0.5), sq, disc));  // on an edge

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-4, 4);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec2 x(U(rng), U(rng));
    mismatches += point_in_region(x, sq, disc) != oracle::in_region(sq.vertices(), disc.center, disc.radius, x, 1e-9);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("convex polygon construction") {
  // Clockwise input is reordered.
  const ConvexPolygon p({Vec2(0, 0), Vec2(0, 1), Vec2(1, 1), Vec2(1, 0)});
  CHECK(p.area() == doctest::Approx(1.0));
  CHECK(ConvexPolygon::is_convex_ccw(p.vertices()));
  CHECK_THROWS_AS(ConvexPolygon({Vec2(0, 0), Vec2(1, 0)}), GeometryError);
  CHECK_THROWS_AS(ConvexPolygon({Vec2(0, 0), Vec2(2, 0), Vec2(1, 0.2), Vec2(1, 2)}), GeometryError);
  const ConvexPolygon q = ConvexPolygon({Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)}).inset(0.25);
  CHECK(q.area() == doctest::Approx(1.5 * 1.5));
}

TEST_CASE("egocircle validation") {
  CHECK_THROWS(EgoCircle({1, 1, 1}, 0, 0.1, 5));                       // too few beams
  CHECK_THROWS(EgoCircle(std::vector<double>(8, 6.0), 0, 0.1, 5));      // above max range
  CHECK_THROWS(EgoCircle(std::vector<double>(8, 0.0), 0, 0.1, 5));      // non-positive
  CHECK(EgoCircle(std::vector<double>(16, 1.0), -pi, 2 * pi / 16, 5).wraps());
  CHECK_FALSE(EgoCircle(std::vector<double>(16, 1.0), -0.5, 0.05, 5).wraps());
}
