#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "flowrisk/geometry.hpp"
#include "test_util.hpp"

using namespace flowrisk;

namespace {

MultiLine single(std::initializer_list<Point2D> pts) { return MultiLine{{PolyLine{pts}}}; }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Brute-force distance: minimum over 10^4 evenly spaced samples per segment.
double sampled_distance(const Point2D& p, const MultiLine& g) {
  double best = INFINITY;
  for (const auto& line : g.lines) {
    for (std::size_t i = 0; i + 1 < line.vertices.size(); ++i) {
      const Point2D a = line.vertices[i], b = line.vertices[i + 1];
      for (int s = 0; s <= 10000; ++s) {
        const double t = s / 10000.0;
        const double dx = a.x() + t * (b.x() - a.x()) - p.x();
        const double dy = a.y() + t * (b.y() - a.y()) - p.y();
        best = std::min(best, std::sqrt(dx * dx + dy * dy));
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("polyline length of a 3-4-5 segment") {
  CHECK(multiline_length(single({{0, 0}, {3, 4}})) == doctest::Approx(5.0));
}

TEST_CASE("multiline length is additive over members") {
  MultiLine g{{PolyLine{{{0, 0}, {1, 0}}}, PolyLine{{{1, 0}, {1, 2}}}}};
  CHECK(multiline_length(g) == doctest::Approx(3.0));
}

TEST_CASE("length, count and bbox agree with naive oracles on random multilines") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const MultiLine g = testutil::random_multiline(gen);
    double total = 0.0;
    std::size_t segments = 0;
    double min_x = INFINITY, min_y = INFINITY, max_x = -INFINITY, max_y = -INFINITY;
    for (const auto& line : g.lines) {
      for (std::size_t i = 0; i < line.vertices.size(); ++i) {
        const auto& v = line.vertices[i];
        min_x = std::min(min_x, v.x());
        min_y = std::min(min_y, v.y());
        max_x = std::max(max_x, v.x());
        max_y = std::max(max_y, v.y());
        if (i + 1 < line.vertices.size()) {
          const auto& w = line.vertices[i + 1];
          total += std::hypot(w.x() - v.x(), w.y() - v.y());
          ++segments;
        }
      }
    }
    CHECK(rel_err(multiline_length(g), total) < 1e-9);
    CHECK(line_count(g) == g.lines.size());
    CHECK(line_count(g, LineCountMode::Segments) == segments);
    const BoundingBox b = bounding_box(g);
    CHECK(b.min_x == min_x);
    CHECK(b.min_y == min_y);
    CHECK(b.max_x == max_x);
    CHECK(b.max_y == max_y);
    CHECK(rel_err(bbox_area(b), (max_x - min_x) * (max_y - min_y)) < 1e-9);
  }
}

TEST_CASE("line count") {
  CHECK(line_count(single({{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 1}})) == 1);
  MultiLine three{{PolyLine{{{0, 0}, {1, 0}}}, PolyLine{{{1, 0}, {2, 0}}}, PolyLine{{{2, 0}, {3, 0}}}}};
  CHECK(line_count(three) == 3);
}

TEST_CASE("bounding box area") {
  const auto b = bounding_box(single({{0, 0}, {3, 4}}));
  CHECK(b == BoundingBox{0, 0, 3, 4});
  CHECK(bbox_area(b) == 12.0);
  CHECK(bbox_area(bounding_box(single({{0, 0}, {5, 0}}))) == 0.0);
}

TEST_CASE("point to segment distance") {
  CHECK(point_to_segment_distance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(point_to_segment_distance({3, 0}, {0, 0}, {1, 0}) == doctest::Approx(2.0));
  CHECK(point_to_segment_distance({2, 2}, {1, 1}, {1, 1}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("point to multiline distance matches dense sampling") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  for (int trial = 0; trial < 30; ++trial) {
    MultiLine g;
    PolyLine line;
    for (int j = 0; j < 3; ++j) line.vertices.emplace_back(coord(gen), coord(gen));
    g.lines.push_back(line);
    const Point2D p(coord(gen), coord(gen));
    // Sampling step is at most ~0.015 m here, so the oracle overestimates by < 1e-4.
    const double exact = point_to_multiline_distance(p, g);
    const double sampled = sampled_distance(p, g);
    CHECK(exact <= sampled + 1e-12);
    CHECK(sampled - exact < 1e-4);
  }
}

TEST_CASE("point to multiline distance on a segment hit by its foot") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Point2D a(coord(gen), coord(gen)), b(coord(gen), coord(gen));
    const Point2D p(coord(gen), coord(gen));
    // Closed-form projection oracle written independently of the library.
    const Point2D d = b - a;
    double t = d.squaredNorm() > 0 ? (p - a).dot(d) / d.squaredNorm() : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double oracle = (a + t * d - p).norm();
    CHECK(std::abs(point_to_segment_distance(p, a, b) - oracle) < 1e-6);
  }
}

TEST_CASE("endpoint set") {
  const auto one = endpoint_set(single({{0, 0}, {1, 1}, {2, 0}}));
  REQUIRE(one.size() == 2);
  CHECK(one[0] == Point2D(0, 0));
  CHECK(one[1] == Point2D(2, 0));
  MultiLine two{{PolyLine{{{0, 0}, {1, 0}}}, PolyLine{{{5, 5}, {6, 5}}}}};
  CHECK(endpoint_set(two).size() == 4);
  CHECK(point_to_endpoint_distance({5, 8}, two) == doctest::Approx(3.0));
}

TEST_CASE("validity") {
  CHECK(is_valid(single({{0, 0}, {1, 0}})));
  CHECK_FALSE(is_valid(single({{0, 0}})));
  CHECK_FALSE(is_valid(MultiLine{}));
  CHECK_FALSE(is_valid(single({{0, 0}, {NAN, 1}})));
}
