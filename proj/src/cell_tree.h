#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "chainrec/grid.h"

namespace chainrec::detail {

// Set of cells within Euclidean distance < sqrt(eps2) of a closed rectangle.
struct Region {
  IntervalBox2 rect;
  double eps2;
};

// Sparse quadtree over a set of grid cells, built in Morton order. Every node
// covers an aligned square of the lattice; only squares holding at least one
// cell exist. Leaves carry the index of their cell in the caller's sorted
// cell list.
class CellTree {
 public:
  struct Node {
    std::uint32_t ix0 = 0;
    std::uint32_t iy0 = 0;
    std::uint32_t size = 0;  // side length in cells
    std::int32_t parent = -1;
    std::int32_t first_child = -1;
    std::uint8_t child_count = 0;
    std::int32_t vertex = -1;  // leaves only
  };

  enum class Overlap { kOutside, kInside, kPartial };

  CellTree(const Grid& grid, std::span<const CellId> cells);

  const Grid& grid() const { return grid_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::int32_t leaf_of(std::size_t vertex) const { return leaf_of_[vertex]; }
  std::size_t vertex_count() const { return leaf_of_.size(); }
  bool empty() const { return nodes_.empty(); }

  // Whether none, all, or some of the lattice cells under node n lie in r.
  Overlap classify(std::int32_t n, const Region& r) const;

  // Calls fn(vertex) for every cell of the tree inside r, in Morton order.
  template <class Fn>
  void for_each_in(const Region& r, Fn&& fn) const {
    if (nodes_.empty()) return;
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
      const std::int32_t n = stack.back();
      stack.pop_back();
      const Overlap o = classify(n, r);
      if (o == Overlap::kOutside) continue;
      if (o == Overlap::kInside) {
        emit_subtree(n, fn);
        continue;
      }
      push_children(n, stack);
    }
  }

  void push_children(std::int32_t n, std::vector<std::int32_t>& stack) const {
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    for (int c = node.child_count - 1; c >= 0; --c) stack.push_back(node.first_child + c);
  }

 private:
  template <class Fn>
  void emit_subtree(std::int32_t n, Fn& fn) const {
    std::vector<std::int32_t> stack{n};
    while (!stack.empty()) {
      const std::int32_t m = stack.back();
      stack.pop_back();
      const Node& node = nodes_[static_cast<std::size_t>(m)];
      if (node.vertex >= 0) {
        fn(static_cast<std::size_t>(node.vertex));
      } else {
        push_children(m, stack);
      }
    }
  }

  Grid grid_;
  std::vector<Node> nodes_;
  std::vector<std::int32_t> leaf_of_;
};

// Mutable per-traversal state layered over a CellTree: how many unvisited
// cells each subtree holds, and the smallest "on stack" key in each subtree.
class TraversalState {
 public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  explicit TraversalState(const CellTree& tree);

  bool visited(std::size_t vertex) const { return visited_[vertex] != 0; }
  void mark_visited(std::size_t vertex);

  void set_key(std::size_t vertex, std::uint32_t key);
  void clear_key(std::size_t vertex);

  // First unvisited vertex inside r (Morton order), or -1.
  std::int64_t find_unvisited(const Region& r);

  // Smallest key inside r that is below `bound`, else `bound`.
  std::uint32_t min_key(const Region& r, std::uint32_t bound);

 private:
  const CellTree& tree_;
  std::vector<std::uint32_t> unvisited_;
  std::vector<std::uint32_t> min_key_;
  std::vector<std::uint8_t> visited_;
  std::vector<std::int32_t> stack_;
};

}  // namespace chainrec::detail
