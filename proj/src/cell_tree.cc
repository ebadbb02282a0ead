#include "cell_tree.h"

#include <algorithm>
#include <numeric>

namespace chainrec::detail {

namespace {

std::uint64_t spread_bits(std::uint32_t v) {
  std::uint64_t x = v;
  x = (x | (x << 16)) & 0x0000FFFF0000FFFFULL;
  x = (x | (x << 8)) & 0x00FF00FF00FF00FFULL;
  x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0FULL;
  x = (x | (x << 2)) & 0x3333333333333333ULL;
  x = (x | (x << 1)) & 0x5555555555555555ULL;
  return x;
}

// y bit above x bit at every level, so quadrant order is (x, y) = 00, 10, 01, 11.
std::uint64_t morton(Cell c) { return spread_bits(c.ix) | (spread_bits(c.iy) << 1); }

}  // namespace

CellTree::CellTree(const Grid& grid, std::span<const CellId> cells)
    : grid_(grid), leaf_of_(cells.size(), -1) {
  if (cells.empty()) return;
  const int depth = grid.depth();
  std::vector<std::uint64_t> code(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) code[i] = morton(grid.cell(cells[i]));
  std::vector<std::uint32_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0U);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return code[a] < code[b]; });

  struct Pending {
    std::int32_t node;
    std::size_t begin, end;
    int level;
  };
  nodes_.reserve(cells.size() * 2);
  nodes_.push_back(Node{0, 0, grid.side(), -1, -1, 0, -1});
  std::vector<Pending> queue{{0, 0, cells.size(), 0}};
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const Pending p = queue[qi];
    if (p.level == depth) {
      const std::uint32_t v = order[p.begin];
      nodes_[p.node].vertex = static_cast<std::int32_t>(v);
      leaf_of_[v] = p.node;
      continue;
    }
    const int shift = 2 * (depth - 1 - p.level);
    const std::uint32_t half = nodes_[p.node].size / 2;
    const auto first = static_cast<std::int32_t>(nodes_.size());
    std::uint8_t count = 0;
    std::size_t b = p.begin;
    while (b < p.end) {
      const std::uint64_t quadrant = (code[order[b]] >> shift) & 3U;
      std::size_t e = b + 1;
      while (e < p.end && ((code[order[e]] >> shift) & 3U) == quadrant) ++e;
      const Node& parent = nodes_[p.node];
      Node child{parent.ix0 + ((quadrant & 1U) ? half : 0U),
                 parent.iy0 + ((quadrant & 2U) ? half : 0U),
                 half,
                 p.node,
                 -1,
                 0,
                 -1};
      const auto id = static_cast<std::int32_t>(nodes_.size());
      nodes_.push_back(child);
      queue.push_back({id, b, e, p.level + 1});
      ++count;
      b = e;
    }
    nodes_[p.node].first_child = first;
    nodes_[p.node].child_count = count;
  }
}

CellTree::Overlap CellTree::classify(std::int32_t n, const Region& r) const {
  const Node& node = nodes_[static_cast<std::size_t>(n)];
  const std::uint32_t x1 = node.ix0 + node.size;
  const std::uint32_t y1 = node.iy0 + node.size;
  const IntervalBox2 box{{grid_.x_at(node.ix0), grid_.x_at(x1)}, {grid_.y_at(node.iy0), grid_.y_at(y1)}};
  if (!(box.distance_squared(r.rect) < r.eps2)) return Overlap::kOutside;
  if (node.size == 1) return Overlap::kInside;
  // The distance to a convex set is convex, so its maximum over the cells of
  // the block is attained at a corner cell.
  auto gap = [](double lo, double hi, const Interval& iv) {
    return std::max({0.0, iv.lo - hi, lo - iv.hi});
  };
  const double dx = std::max(gap(grid_.x_at(node.ix0), grid_.x_at(node.ix0 + 1), r.rect.re),
                             gap(grid_.x_at(x1 - 1), grid_.x_at(x1), r.rect.re));
  const double dy = std::max(gap(grid_.y_at(node.iy0), grid_.y_at(node.iy0 + 1), r.rect.im),
                             gap(grid_.y_at(y1 - 1), grid_.y_at(y1), r.rect.im));
  return dx * dx + dy * dy < r.eps2 ? Overlap::kInside : Overlap::kPartial;
}

// ---------------------------------------------------------- TraversalState

TraversalState::TraversalState(const CellTree& tree)
    : tree_(tree),
      unvisited_(tree.nodes().size(), 0),
      min_key_(tree.nodes().size(), kNone),
      visited_(tree.vertex_count(), 0) {
  for (std::size_t v = 0; v < tree.vertex_count(); ++v) {
    for (std::int32_t n = tree.leaf_of(v); n >= 0; n = tree.nodes()[n].parent) ++unvisited_[n];
  }
}

void TraversalState::mark_visited(std::size_t vertex) {
  if (visited_[vertex]) return;
  visited_[vertex] = 1;
  for (std::int32_t n = tree_.leaf_of(vertex); n >= 0; n = tree_.nodes()[n].parent) --unvisited_[n];
}

void TraversalState::set_key(std::size_t vertex, std::uint32_t key) {
  for (std::int32_t n = tree_.leaf_of(vertex); n >= 0; n = tree_.nodes()[n].parent) {
    if (min_key_[n] <= key) break;
    min_key_[n] = key;
  }
}

void TraversalState::clear_key(std::size_t vertex) {
  const auto& nodes = tree_.nodes();
  std::int32_t n = tree_.leaf_of(vertex);
  min_key_[n] = kNone;
  for (n = nodes[n].parent; n >= 0; n = nodes[n].parent) {
    std::uint32_t m = kNone;
    for (int c = 0; c < nodes[n].child_count; ++c) m = std::min(m, min_key_[nodes[n].first_child + c]);
    if (m == min_key_[n]) break;
    min_key_[n] = m;
  }
}

std::int64_t TraversalState::find_unvisited(const Region& r) {
  if (tree_.empty()) return -1;
  const auto& nodes = tree_.nodes();
  stack_.assign(1, 0);
  while (!stack_.empty()) {
    std::int32_t n = stack_.back();
    stack_.pop_back();
    if (unvisited_[n] == 0) continue;
    const auto o = tree_.classify(n, r);
    if (o == CellTree::Overlap::kOutside) continue;
    if (o == CellTree::Overlap::kInside) {
      while (nodes[n].vertex < 0) {
        std::int32_t c = nodes[n].first_child;
        while (unvisited_[c] == 0) ++c;
        n = c;
      }
      return nodes[n].vertex;
    }
    tree_.push_children(n, stack_);
  }
  return -1;
}

std::uint32_t TraversalState::min_key(const Region& r, std::uint32_t bound) {
  if (tree_.empty()) return bound;
  std::uint32_t best = bound;
  stack_.assign(1, 0);
  while (!stack_.empty()) {
    const std::int32_t n = stack_.back();
    stack_.pop_back();
    if (min_key_[n] >= best) continue;
    const auto o = tree_.classify(n, r);
    if (o == CellTree::Overlap::kOutside) continue;
    if (o == CellTree::Overlap::kInside) {
      best = min_key_[n];
      continue;
    }
    tree_.push_children(n, stack_);
  }
  return best;
}

}  // namespace chainrec::detail
