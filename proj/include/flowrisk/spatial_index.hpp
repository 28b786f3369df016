#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "flowrisk/geometry.hpp"

namespace flowrisk {

struct IndexEntry {
  std::uint64_t item_id = 0;
  BoundingBox box;
};

/// Static R-tree, sort-tile-recursive bulk loaded. Immutable after
/// construction; queries are read-only.
class SpatialIndex {
 public:
  static constexpr std::size_t kDefaultFanout = 16;

  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<IndexEntry> entries, std::size_t fanout = kDefaultFanout);

  /// Ids of every entry whose box intersects the closed square of half-width
  /// r about p, sorted ascending and deduplicated.
  std::vector<std::uint64_t> query_radius(const Point2D& p, double r) const;
  std::vector<std::uint64_t> query_box(const BoundingBox& query) const;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t fanout() const noexcept { return fanout_; }
  /// Number of levels including the leaf level; 0 for an empty index.
  std::size_t height() const noexcept { return levels_.size(); }

  /// True when every internal node box contains all its children.
  bool check_containment() const;

 private:
  struct Node {
    BoundingBox box;
    std::size_t first = 0;  // index into the child level (or entries_ at level 0)
    std::size_t count = 0;
  };

  std::size_t fanout_ = kDefaultFanout;
  std::vector<IndexEntry> entries_;        // reordered into leaf order
  std::vector<std::vector<Node>> levels_;  // levels_[0] = leaves, back() = root level
};

SpatialIndex build(std::vector<IndexEntry> entries, std::size_t fanout = SpatialIndex::kDefaultFanout);

}  // namespace flowrisk
