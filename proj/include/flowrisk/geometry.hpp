#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace flowrisk {

/// Planar point in a projected frame: x = easting, y = northing, meters.
template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Point2D = Point2<double>;

struct PolyLine {
  std::vector<Point2D> vertices;
};

struct MultiLine {
  std::vector<PolyLine> lines;
};

struct BoundingBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool valid() const noexcept { return min_x <= max_x && min_y <= max_y; }
  bool contains(const Point2D& p) const noexcept {
    return p.x() >= min_x && p.x() <= max_x && p.y() >= min_y && p.y() <= max_y;
  }
  bool intersects(const BoundingBox& o) const noexcept {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
  }
  void expand(const BoundingBox& o) noexcept;
  void expand(const Point2D& p) noexcept;

  static BoundingBox around(const Point2D& p) noexcept { return {p.x(), p.y(), p.x(), p.y()}; }
  /// Closed axis-aligned square of half-width r centred on p.
  static BoundingBox square(const Point2D& p, double r) noexcept {
    return {p.x() - r, p.y() - r, p.x() + r, p.y() + r};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// How the "Number of Lines" feature counts: member polylines (default) or
/// elementary two-vertex segments.
enum class LineCountMode { Polylines, Segments };

bool is_valid(const PolyLine& line) noexcept;
bool is_valid(const MultiLine& g) noexcept;

double polyline_length(const PolyLine& line) noexcept;
double multiline_length(const MultiLine& g) noexcept;

std::size_t line_count(const MultiLine& g, LineCountMode mode = LineCountMode::Polylines) noexcept;

BoundingBox bounding_box(const MultiLine& g) noexcept;
double bbox_area(const BoundingBox& b) noexcept;

double point_to_segment_distance(const Point2D& p, const Point2D& a, const Point2D& b) noexcept;
double point_to_multiline_distance(const Point2D& p, const MultiLine& g) noexcept;

/// First and last vertex of every member polyline, in member order, with
/// duplicates retained (size = 2 * member count).
std::vector<Point2D> endpoint_set(const MultiLine& g);

/// Smallest distance from p to any point of endpoint_set(g).
double point_to_endpoint_distance(const Point2D& p, const MultiLine& g) noexcept;

}  // namespace flowrisk
