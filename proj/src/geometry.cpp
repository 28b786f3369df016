#include "flowrisk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowrisk {

void BoundingBox::expand(const BoundingBox& o) noexcept {
  min_x = std::min(min_x, o.min_x);
  min_y = std::min(min_y, o.min_y);
  max_x = std::max(max_x, o.max_x);
  max_y = std::max(max_y, o.max_y);
}

void BoundingBox::expand(const Point2D& p) noexcept { expand(around(p)); }

bool is_valid(const PolyLine& line) noexcept {
  if (line.vertices.size() < 2) return false;
  return std::all_of(line.vertices.begin(), line.vertices.end(),
                     [](const Point2D& p) { return p.allFinite(); });
}

bool is_valid(const MultiLine& g) noexcept {
  if (g.lines.empty()) return false;
  return std::all_of(g.lines.begin(), g.lines.end(),
                     [](const PolyLine& l) { return is_valid(l); });
}

double polyline_length(const PolyLine& line) noexcept {
  double total = 0.0;
  for (std::size_t i = 1; i < line.vertices.size(); ++i) {
    total += (line.vertices[i] - line.vertices[i - 1]).norm();
  }
  return total;
}

double multiline_length(const MultiLine& g) noexcept {
  double total = 0.0;
  for (const auto& line : g.lines) total += polyline_length(line);
  return total;
}

std::size_t line_count(const MultiLine& g, LineCountMode mode) noexcept {
  if (mode == LineCountMode::Polylines) return g.lines.size();
  std::size_t segments = 0;
  for (const auto& line : g.lines) {
    if (!line.vertices.empty()) segments += line.vertices.size() - 1;
  }
  return segments;
}

BoundingBox bounding_box(const MultiLine& g) noexcept {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BoundingBox box{inf, inf, -inf, -inf};
  for (const auto& line : g.lines) {
    for (const auto& v : line.vertices) box.expand(v);
  }
  return box;
}

double bbox_area(const BoundingBox& b) noexcept { return (b.max_x - b.min_x) * (b.max_y - b.min_y); }

double point_to_segment_distance(const Point2D& p, const Point2D& a, const Point2D& b) noexcept {
  const Point2D ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double point_to_multiline_distance(const Point2D& p, const MultiLine& g) noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& line : g.lines) {
    const auto& v = line.vertices;
    if (v.size() == 1) best = std::min(best, (p - v.front()).norm());
    for (std::size_t i = 1; i < v.size(); ++i) {
      best = std::min(best, point_to_segment_distance(p, v[i - 1], v[i]));
      if (best == 0.0) return 0.0;
    }
  }
  return best;
}

std::vector<Point2D> endpoint_set(const MultiLine& g) {
  std::vector<Point2D> out;
  out.reserve(2 * g.lines.size());
  for (const auto& line : g.lines) {
    if (line.vertices.empty()) continue;
    out.push_back(line.vertices.front());
    out.push_back(line.vertices.back());
  }
  return out;
}

double point_to_endpoint_distance(const Point2D& p, const MultiLine& g) noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& line : g.lines) {
    if (line.vertices.empty()) continue;
    best = std::min({best, (p - line.vertices.front()).norm(), (p - line.vertices.back()).norm()});
  }
  return best;
}

}  // namespace flowrisk
