#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flowrisk/crs.hpp"
#include "flowrisk/error.hpp"

using namespace flowrisk;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Meridian arc by composite Simpson quadrature of the meridional radius of
// curvature a(1-e^2)/(1-e^2 sin^2)^(3/2).
double arc_quadrature(double lat_deg, const ProjectionParams& p) {
  const double e2 = p.flattening * (2.0 - p.flattening);
  const double phi = lat_deg * kDeg;
  const int n = 4000;
  const double h = phi / n;
  auto f = [&](double t) {
    const double s = std::sin(t);
    return p.semi_major_axis * (1.0 - e2) / std::pow(1.0 - e2 * s * s, 1.5);
  };
  double sum = f(0.0) + f(phi);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return sum * h / 3.0;
}

// Classical e^2-series transverse Mercator (USGS professional-paper form).
Point2D snyder_forward(double lat_deg, double lon_deg, const ProjectionParams& p) {
  const double a = p.semi_major_axis, k0 = p.scale_factor;
  const double e2 = p.flattening * (2.0 - p.flattening);
  const double ep2 = e2 / (1.0 - e2);
  const double e4 = e2 * e2, e6 = e4 * e2;
  const double phi = lat_deg * kDeg;
  const double M = a * ((1 - e2 / 4 - 3 * e4 / 64 - 5 * e6 / 256) * phi -
                        (3 * e2 / 8 + 3 * e4 / 32 + 45 * e6 / 1024) * std::sin(2 * phi) +
                        (15 * e4 / 256 + 45 * e6 / 1024) * std::sin(4 * phi) - (35 * e6 / 3072) * std::sin(6 * phi));
  const double N = a / std::sqrt(1 - e2 * std::sin(phi) * std::sin(phi));
  const double T = std::tan(phi) * std::tan(phi);
  const double C = ep2 * std::cos(phi) * std::cos(phi);
  const double A = (lon_deg - p.central_meridian) * kDeg * std::cos(phi);
  const double x = k0 * N *
                   (A + (1 - T + C) * std::pow(A, 3) / 6 + (5 - 18 * T + T * T + 72 * C - 58 * ep2) * std::pow(A, 5) / 120);
  const double y =
      k0 * (M + N * std::tan(phi) *
                    (A * A / 2 + (5 - T + 9 * C + 4 * C * C) * std::pow(A, 4) / 24 +
                     (61 - 58 * T + T * T + 600 * C - 330 * ep2) * std::pow(A, 6) / 720));
  return {x + p.false_easting, y + p.false_northing};
}

}  // namespace

TEST_CASE("equator on the central meridian maps to the false origin") {
  const Point2D q = project({0.0, -105.0});
  CHECK(q.x() == doctest::Approx(500000.0).epsilon(1e-15));
  CHECK(std::abs(q.y()) < 1e-9);
}

TEST_CASE("central meridian: easting exact, northing is the scaled arc") {
  const ProjectionParams p;
  for (double lat = -80.0; lat <= 80.0; lat += 7.3) {
    const Point2D q = project({lat, -105.0});
    CHECK(std::abs(q.x() - 500000.0) < 1e-6);
    CHECK(std::abs(q.y() - p.scale_factor * meridian_arc(lat)) < 1e-6);
  }
}

TEST_CASE("meridian arc agrees with quadrature") {
  const ProjectionParams p;
  for (double lat : {1.0, 15.0, 37.0, 40.0, 41.0, 60.0, 85.0}) {
    CHECK(std::abs(meridian_arc(lat) - arc_quadrature(lat, p)) < 1e-6);
  }
  CHECK(meridian_arc(-40.0) == doctest::Approx(-meridian_arc(40.0)));
}

TEST_CASE("forward projection agrees with the e^2 series oracle") {
  const ProjectionParams p;
  const Point2D q = project({40.0, -105.27});
  const Point2D o = snyder_forward(40.0, -105.27, p);
  CHECK(std::abs(q.x() - o.x()) < 1e-3);
  CHECK(std::abs(q.y() - o.y()) < 1e-3);

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> lat(37.0, 41.0), lon(-106.0, -104.0);
  for (int i = 0; i < 200; ++i) {
    const double la = lat(gen), lo = lon(gen);
    CHECK((project({la, lo}) - snyder_forward(la, lo, p)).norm() < 1e-3);
  }
}

TEST_CASE("inverse at the false origin and on the meridian") {
  const GeoPoint g = unproject({500000.0, 0.0});
  CHECK(std::abs(g.latitude) < 1e-9);
  CHECK(std::abs(g.longitude + 105.0) < 1e-9);

  const ProjectionParams p;
  const GeoPoint h = unproject({500000.0, p.scale_factor * arc_quadrature(40.0, p)});
  CHECK(std::abs(h.latitude - 40.0) < 1e-7);
  CHECK(std::abs(h.longitude + 105.0) < 1e-7);
}

TEST_CASE("round trip over 1000 in-zone points stays under a millimetre") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> lat(37.0, 41.0), lon(-109.0, -102.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const GeoPoint g{lat(gen), lon(gen)};
    const Point2D q = project(g);
    const GeoPoint back = unproject(q);
    worst = std::max(worst, (project(back) - q).norm());
    // Geographic residual converted to metres on the sphere.
    const double dn = (back.latitude - g.latitude) * kDeg * 6.371e6;
    const double de = (back.longitude - g.longitude) * kDeg * 6.371e6 * std::cos(g.latitude * kDeg);
    worst = std::max(worst, std::hypot(dn, de));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("out of zone longitudes are rejected") {
  CHECK_THROWS_AS(project({40.0, -116.0}), Error);
  try {
    project({40.0, -94.0});
    FAIL("expected OutOfZone");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfZone);
  }
}

TEST_CASE("invalid projection parameters") {
  ProjectionParams p;
  p.scale_factor = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}
