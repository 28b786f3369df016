#include <doctest.h>

#include <algorithm>
#include <random>

#include "flowrisk/spatial_index.hpp"

using namespace flowrisk;

namespace {

std::vector<IndexEntry> random_boxes(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> pos(0.0, 10000.0), size(0.0, 200.0);
  std::vector<IndexEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pos(gen), y = pos(gen);
    entries.push_back({i, {x, y, x + size(gen), y + size(gen)}});
  }
  return entries;
}

// Linear scan against the closed square [p - r, p + r]^2.
std::vector<std::uint64_t> scan(const std::vector<IndexEntry>& entries, const Point2D& p, double r) {
  std::vector<std::uint64_t> out;
  for (const auto& e : entries) {
    const bool hit = e.box.min_x <= p.x() + r && e.box.max_x >= p.x() - r && e.box.min_y <= p.y() + r &&
                     e.box.max_y >= p.y() - r;
    if (hit) out.push_back(e.item_id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("empty index answers nothing") {
  const SpatialIndex index(std::vector<IndexEntry>{});
  CHECK(index.empty());
  CHECK(index.height() == 0);
  CHECK(index.query_radius({0, 0}, 1e9).empty());
}

TEST_CASE("single entry") {
  const SpatialIndex index(std::vector<IndexEntry>{{42, {0, 0, 1, 1}}});
  CHECK(index.height() == 1);
  CHECK(index.query_radius({0.5, 0.5}, 0.0) == std::vector<std::uint64_t>{42});
  CHECK(index.query_radius({5, 5}, 1.0).empty());
}

TEST_CASE("radius zero inside exactly one box") {
  const SpatialIndex index(std::vector<IndexEntry>{{1, {0, 0, 1, 1}}, {2, {2, 2, 3, 3}}, {3, {5, 0, 6, 1}}});
  CHECK(index.query_radius({2.5, 2.5}, 0.0) == std::vector<std::uint64_t>{2});
}

TEST_CASE("distance exactly r from an edge is included") {
  const SpatialIndex index(std::vector<IndexEntry>{{7, {0, 0, 1, 1}}});
  CHECK(index.query_radius({3.0, 0.5}, 2.0) == std::vector<std::uint64_t>{7});
  CHECK(index.query_radius({3.0, 0.5}, 1.999999).empty());
}

TEST_CASE("every box is found by querying with itself") {
  std::mt19937_64 gen(1);
  const auto entries = random_boxes(gen, 1000);
  const SpatialIndex index(entries);
  CHECK(index.check_containment());
  for (const auto& e : entries) {
    const auto hits = index.query_box(e.box);
    CHECK(std::binary_search(hits.begin(), hits.end(), e.item_id));
  }
}

TEST_CASE("radius queries equal a linear scan for several fanouts") {
  std::mt19937_64 gen(2);
  const auto entries = random_boxes(gen, 1000);
  std::uniform_real_distribution<double> pos(-100.0, 10100.0), radius(0.0, 300.0);
  for (std::size_t fanout : {2u, 4u, 16u, 64u}) {
    const SpatialIndex index(entries, fanout);
    CHECK(index.size() == 1000);
    for (int q = 0; q < 200; ++q) {
      const Point2D p(pos(gen), pos(gen));
      const double r = radius(gen);
      CHECK(index.query_radius(p, r) == scan(entries, p, r));
    }
  }
}

TEST_CASE("duplicate item ids are reported once") {
  const SpatialIndex index({{5, {0, 0, 1, 1}}, {5, {0.5, 0.5, 2, 2}}, {6, {10, 10, 11, 11}}});
  CHECK(index.query_radius({0.75, 0.75}, 0.1) == std::vector<std::uint64_t>{5});
}
