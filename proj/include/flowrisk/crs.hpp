#pragma once

#include "flowrisk/geometry.hpp"

namespace flowrisk {

struct GeoPoint {
  double latitude = 0.0;   // degrees
  double longitude = 0.0;  // degrees

  bool valid() const noexcept;
};

/// Transverse-Mercator parameters. Defaults are UTM zone 13N on GRS80
/// (EPSG:26913).
struct ProjectionParams {
  double central_meridian = -105.0;
  double scale_factor = 0.9996;
  double false_easting = 500000.0;
  double false_northing = 0.0;
  double semi_major_axis = 6378137.0;
  double flattening = 1.0 / 298.257222101;

  /// Throws Error(InvalidArgument) when a, k0 or f are out of range.
  void validate() const;
};

/// Longitudes further than this from the central meridian are rejected.
inline constexpr double kMaxZoneOffsetDegrees = 10.0;

/// Distance along the meridian from the equator to `latitude_deg`, meters
/// (Helmert series in the third flattening, through n^4).
double meridian_arc(double latitude_deg, const ProjectionParams& params = {});

/// Forward transverse Mercator (Krüger series through n^4). Throws
/// Error(OutOfZone) when |lon - central_meridian| >= 10 degrees.
Point2D project(const GeoPoint& p, const ProjectionParams& params = {});

/// Inverse transverse Mercator. The conformal-to-geodetic latitude step is a
/// Newton iteration; Error(NonConvergence) after 20 iterations.
GeoPoint unproject(const Point2D& q, const ProjectionParams& params = {});

}  // namespace flowrisk
