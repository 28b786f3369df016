#include "flowrisk/crs.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "flowrisk/error.hpp"

namespace flowrisk {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct SeriesCoefficients {
  double e = 0.0;         // first eccentricity
  double rectifying = 0;  // A: radius of the rectifying sphere
  std::array<double, 4> alpha{};
  std::array<double, 4> beta{};
};

SeriesCoefficients coefficients(const ProjectionParams& p) {
  const double f = p.flattening;
  const double n = f / (2.0 - f);
  const double n2 = n * n, n3 = n2 * n, n4 = n3 * n;
  SeriesCoefficients c;
  c.e = std::sqrt(f * (2.0 - f));
  c.rectifying = p.semi_major_axis / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0);
  c.alpha = {n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0,
             13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0,
             61.0 * n3 / 240.0 - 103.0 * n4 / 140.0,
             49561.0 * n4 / 161280.0};
  c.beta = {n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0,
            n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0,
            17.0 * n3 / 480.0 - 37.0 * n4 / 840.0,
            4397.0 * n4 / 161280.0};
  return c;
}

// tan of the conformal latitude from tan of the geodetic latitude.
double conformal_tau(double tau, double e) {
  const double sigma = std::sinh(e * std::atanh(e * tau / std::hypot(1.0, tau)));
  return tau * std::hypot(1.0, sigma) - sigma * std::hypot(1.0, tau);
}

double geodetic_tau(double tau_prime, double e) {
  constexpr int kMaxIterations = 20;
  const double e2m = 1.0 - e * e;
  double tau = tau_prime / e2m;
  for (int i = 0; i < kMaxIterations; ++i) {
    const double tp = conformal_tau(tau, e);
    const double dtau = (tau_prime - tp) / std::hypot(1.0, tp) * (1.0 + e2m * tau * tau) /
                        (e2m * std::hypot(1.0, tau));
    tau += dtau;
    if (std::abs(dtau) <= 1e-14 * std::max(1.0, std::abs(tau))) return tau;
  }
  throw Error(ErrorKind::NonConvergence,
              "footpoint latitude did not converge in " + std::to_string(kMaxIterations) +
                  " iterations");
}

}  // namespace

bool GeoPoint::valid() const noexcept {
  return std::isfinite(latitude) && std::isfinite(longitude) && latitude >= -90.0 &&
         latitude <= 90.0 && longitude >= -180.0 && longitude <= 180.0;
}

void ProjectionParams::validate() const {
  if (!(semi_major_axis > 0.0)) throw Error(ErrorKind::InvalidArgument, "semi-major axis must be > 0");
  if (!(scale_factor > 0.0 && scale_factor <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "scale factor must be in (0, 1]");
  if (!(std::abs(flattening) < 1.0)) throw Error(ErrorKind::InvalidArgument, "|flattening| must be < 1");
}

double meridian_arc(double latitude_deg, const ProjectionParams& params) {
  const double f = params.flattening;
  const double n = f / (2.0 - f);
  const double n2 = n * n, n3 = n2 * n, n4 = n3 * n;
  const double phi = latitude_deg * kDeg;
  return params.semi_major_axis / (1.0 + n) *
         ((1.0 + n2 / 4.0 + n4 / 64.0) * phi - 1.5 * (n - n3 / 8.0) * std::sin(2.0 * phi) +
          15.0 / 16.0 * (n2 - n4 / 4.0) * std::sin(4.0 * phi) - 35.0 / 48.0 * n3 * std::sin(6.0 * phi) +
          315.0 / 512.0 * n4 * std::sin(8.0 * phi));
}

Point2D project(const GeoPoint& p, const ProjectionParams& params) {
  if (!p.valid()) throw Error(ErrorKind::InvalidArgument, "geographic point out of range");
  const double dlon = p.longitude - params.central_meridian;
  if (!(std::abs(dlon) < kMaxZoneOffsetDegrees)) {
    throw Error(ErrorKind::OutOfZone, "longitude " + std::to_string(p.longitude) +
                                          " is not within 10 degrees of the central meridian");
  }
  const auto c = coefficients(params);
  const double lambda = dlon * kDeg;
  const double phi = p.latitude * kDeg;

  const double tau_prime = conformal_tau(std::tan(phi), c.e);
  const double xi_prime = std::atan2(tau_prime, std::cos(lambda));
  const double eta_prime = std::asinh(std::sin(lambda) / std::hypot(tau_prime, std::cos(lambda)));

  double xi = xi_prime;
  double eta = eta_prime;
  for (int j = 1; j <= 4; ++j) {
    const double a = c.alpha[j - 1];
    xi += a * std::sin(2.0 * j * xi_prime) * std::cosh(2.0 * j * eta_prime);
    eta += a * std::cos(2.0 * j * xi_prime) * std::sinh(2.0 * j * eta_prime);
  }
  const double k0a = params.scale_factor * c.rectifying;
  return {params.false_easting + k0a * eta, params.false_northing + k0a * xi};
}

GeoPoint unproject(const Point2D& q, const ProjectionParams& params) {
  const auto c = coefficients(params);
  const double k0a = params.scale_factor * c.rectifying;
  const double xi = (q.y() - params.false_northing) / k0a;
  const double eta = (q.x() - params.false_easting) / k0a;

  double xi_prime = xi;
  double eta_prime = eta;
  for (int j = 1; j <= 4; ++j) {
    const double b = c.beta[j - 1];
    xi_prime -= b * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
    eta_prime -= b * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
  }
  const double tau_prime =
      std::sin(xi_prime) / std::hypot(std::sinh(eta_prime), std::cos(xi_prime));
  const double lambda = std::atan2(std::sinh(eta_prime), std::cos(xi_prime));
  const double tau = geodetic_tau(tau_prime, c.e);
  return {std::atan(tau) / kDeg, params.central_meridian + lambda / kDeg};
}

}  // namespace flowrisk
