#include "flowrisk/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flowrisk/error.hpp"

namespace flowrisk {
namespace {

double center_x(const BoundingBox& b) { return 0.5 * (b.min_x + b.max_x); }
double center_y(const BoundingBox& b) { return 0.5 * (b.min_y + b.max_y); }

// Sort-tile-recursive ordering of `items` (anything with a .box) into runs
// of `fanout`; returns the run boundaries as (first, count).
template <typename T>
std::vector<std::pair<std::size_t, std::size_t>> str_pack(std::vector<T>& items, std::size_t fanout) {
  const std::size_t n = items.size();
  const std::size_t pages = (n + fanout - 1) / fanout;
  const auto slices = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pages))));
  const std::size_t slice_size = slices * fanout;

  auto by_x = [](const T& a, const T& b) { return center_x(a.box) < center_x(b.box); };
  auto by_y = [](const T& a, const T& b) { return center_y(a.box) < center_y(b.box); };
  std::stable_sort(items.begin(), items.end(), by_x);

  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t s = 0; s < n; s += slice_size) {
    const std::size_t end = std::min(n, s + slice_size);
    std::stable_sort(items.begin() + static_cast<std::ptrdiff_t>(s),
                     items.begin() + static_cast<std::ptrdiff_t>(end), by_y);
    for (std::size_t r = s; r < end; r += fanout) runs.emplace_back(r, std::min(fanout, end - r));
  }
  return runs;
}

}  // namespace

SpatialIndex::SpatialIndex(std::vector<IndexEntry> entries, std::size_t fanout)
    : fanout_(fanout), entries_(std::move(entries)) {
  if (fanout_ < 2) throw Error(ErrorKind::InvalidArgument, "R-tree fanout must be >= 2");
  for (const auto& e : entries_) {
    if (!e.box.valid()) throw Error(ErrorKind::InvalidArgument, "index entry with invalid box");
  }
  if (entries_.empty()) return;

  std::vector<Node> level;
  for (auto [first, count] : str_pack(entries_, fanout_)) {
    Node node{entries_[first].box, first, count};
    for (std::size_t i = first; i < first + count; ++i) node.box.expand(entries_[i].box);
    level.push_back(node);
  }
  levels_.push_back(std::move(level));

  while (levels_.back().size() > 1) {
    std::vector<Node> children = std::move(levels_.back());
    const auto runs = str_pack(children, fanout_);
    levels_.back() = children;  // children reordered in place by packing
    std::vector<Node> parents;
    for (auto [first, count] : runs) {
      Node node{children[first].box, first, count};
      for (std::size_t i = first; i < first + count; ++i) node.box.expand(children[i].box);
      parents.push_back(node);
    }
    levels_.push_back(std::move(parents));
  }
}

std::vector<std::uint64_t> SpatialIndex::query_radius(const Point2D& p, double r) const {
  if (r < 0.0) throw Error(ErrorKind::InvalidArgument, "query radius must be >= 0");
  return query_box(BoundingBox::square(p, r));
}

std::vector<std::uint64_t> SpatialIndex::query_box(const BoundingBox& query) const {
  std::vector<std::uint64_t> out;
  if (levels_.empty()) return out;

  struct Frame {
    std::size_t level;
    std::size_t node;
  };
  std::vector<Frame> stack;
  const std::size_t top = levels_.size() - 1;
  for (std::size_t i = 0; i < levels_[top].size(); ++i) stack.push_back({top, i});

  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const Node& node = levels_[f.level][f.node];
    if (!node.box.intersects(query)) continue;
    if (f.level == 0) {
      for (std::size_t i = node.first; i < node.first + node.count; ++i) {
        if (entries_[i].box.intersects(query)) out.push_back(entries_[i].item_id);
      }
    } else {
      for (std::size_t i = node.first; i < node.first + node.count; ++i) stack.push_back({f.level - 1, i});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool SpatialIndex::check_containment() const {
  auto covers = [](const BoundingBox& outer, const BoundingBox& inner) {
    return outer.min_x <= inner.min_x && outer.min_y <= inner.min_y && outer.max_x >= inner.max_x &&
           outer.max_y >= inner.max_y;
  };
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    for (const Node& node : levels_[l]) {
      for (std::size_t i = node.first; i < node.first + node.count; ++i) {
        const BoundingBox& child = l == 0 ? entries_[i].box : levels_[l - 1][i].box;
        if (!covers(node.box, child)) return false;
      }
    }
  }
  return true;
}

SpatialIndex build(std::vector<IndexEntry> entries, std::size_t fanout) {
  return SpatialIndex(std::move(entries), fanout);
}

}  // namespace flowrisk
