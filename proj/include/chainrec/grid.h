#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainrec/interval.h"

namespace chainrec {

// Row-major cell id: (iy << depth) | ix.
using CellId = std::uint64_t;

struct Cell {
  std::uint32_t ix = 0;
  std::uint32_t iy = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Inclusive range of lattice indices.
struct CellRange {
  std::uint32_t ix0, ix1, iy0, iy1;
};

// Region that trims the lattice: a cell is retained iff its closed box meets it.
struct Membership {
  enum class Kind { kRect, kDisc };
  Kind kind = Kind::kRect;
  Point center{0.0, 0.0};
  double radius = 1.0;

  static Membership rect() { return {}; }
  static Membership disc(Point center = {0.0, 0.0}, double radius = 1.0) {
    return {Kind::kDisc, center, radius};
  }
  friend bool operator==(const Membership&, const Membership&) = default;
};

// Uniform 2^depth x 2^depth subdivision of a compact rectangle.
class Grid {
 public:
  static constexpr int kMaxDepth = 16;
  // Dense per-lattice-cell buffers are allocated only up to this depth.
  static constexpr int kMaxDenseDepth = 13;

  Grid(const IntervalBox2& bounds, int depth, Membership membership = Membership::rect());

  const IntervalBox2& bounds() const { return bounds_; }
  int depth() const { return depth_; }
  const Membership& membership() const { return membership_; }
  std::uint32_t side() const { return 1U << depth_; }
  std::uint64_t lattice_size() const { return std::uint64_t{side()} * side(); }
  double cell_width() const { return cell_w_; }
  double cell_height() const { return cell_h_; }
  double cell_diameter() const;

  CellId id(Cell c) const { return (std::uint64_t{c.iy} << depth_) | c.ix; }
  Cell cell(CellId id) const {
    return {static_cast<std::uint32_t>(id & (side() - 1)), static_cast<std::uint32_t>(id >> depth_)};
  }

  double x_at(std::uint32_t ix) const { return bounds_.re.lo + ix * cell_w_; }
  double y_at(std::uint32_t iy) const { return bounds_.im.lo + iy * cell_h_; }
  IntervalBox2 cell_box(Cell c) const {
    return {{x_at(c.ix), x_at(c.ix + 1)}, {y_at(c.iy), y_at(c.iy + 1)}};
  }
  IntervalBox2 cell_box(CellId id) const { return cell_box(cell(id)); }
  Point cell_center(Cell c) const {
    return {0.5 * (x_at(c.ix) + x_at(c.ix + 1)), 0.5 * (y_at(c.iy) + y_at(c.iy + 1))};
  }
  Point cell_center(CellId id) const { return cell_center(cell(id)); }

  bool retained(Cell c) const;
  bool retained(CellId id) const { return retained(cell(id)); }

  // Lattice cells whose closed box meets the closed rectangle r.
  std::optional<CellRange> cells_meeting(const IntervalBox2& r) const;

  // Retained cell whose closed box contains p (lowest id on ties).
  std::optional<CellId> locate(Point p) const;

  // Throws BudgetError if a dense per-cell buffer would be too large.
  void require_dense(const char* what) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.bounds_ == b.bounds_ && a.depth_ == b.depth_ && a.membership_ == b.membership_;
  }

 private:
  IntervalBox2 bounds_;
  int depth_;
  Membership membership_;
  double cell_w_;
  double cell_h_;
};

// Sorted, duplicate-free set of retained cells of one grid.
class BoxSet {
 public:
  explicit BoxSet(Grid grid) : grid_(std::move(grid)) {}
  BoxSet(Grid grid, std::vector<CellId> ids);

  static BoxSet all(const Grid& grid);
  // Builds from ids already known to be sorted, unique and retained.
  static BoxSet from_sorted(Grid grid, std::vector<CellId> ids);

  const Grid& grid() const { return grid_; }
  const std::vector<CellId>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(CellId id) const;
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  BoxSet unite(const BoxSet& o) const;
  BoxSet intersect(const BoxSet& o) const;
  BoxSet subtract(const BoxSet& o) const;
  BoxSet complement() const;
  BoxSet symmetric_difference(const BoxSet& o) const;
  bool subset_of(const BoxSet& o) const;
  bool intersects(const BoxSet& o) const;

  // Total area of the member cells.
  double area() const;

  friend bool operator==(const BoxSet& a, const BoxSet& b) {
    return a.grid_ == b.grid_ && a.ids_ == b.ids_;
  }

 private:
  void check_same_grid(const BoxSet& o) const;

  Grid grid_;
  std::vector<CellId> ids_;
};

using PointPredicate = std::function<bool(Point)>;

// Retained cells containing at least one of samples_per_cell stratified samples
// that satisfy pred. Not a certified cover.
BoxSet cover_predicate(const Grid& grid, const PointPredicate& pred, int samples_per_cell);

// Retained cells whose closed box meets the open disc |z - center| < radius.
BoxSet disc_cells(const Grid& grid, Point center, double radius);

// Retained cells meeting the closed rectangle r.
BoxSet cells_meeting(const Grid& grid, const IntervalBox2& r);

// Retained cells within Euclidean distance eps (cell-to-cell minimum distance)
// of some member. fatten(s, 0) adds the eight touching neighbours.
BoxSet fatten(const BoxSet& s, double eps);

// Symmetric Hausdorff distance between the cell-center sets. Throws on empty input.
double hausdorff(const BoxSet& a, const BoxSet& b);
double hausdorff(const BoxSet& a, std::span<const Point> points);

// max over a of the distance to the nearest center of b.
double directed_hausdorff(const BoxSet& a, const BoxSet& b);

// Squared distance from every lattice cell center to the nearest center in s,
// indexed by CellId over the full lattice (exact Euclidean distance transform).
std::vector<double> distance_transform(const BoxSet& s);

// Cells of s with a lattice 8-neighbour outside s, together with cells of the
// grid outside s that touch s.
BoxSet boundary_layer(const BoxSet& s);

// Accumulates the retained cells meeting a union of closed rectangles using a
// 2-D difference array. Reusable after reset().
class RectCover {
 public:
  explicit RectCover(const Grid& grid);

  void add(const IntervalBox2& r);
  void reset();
  bool empty() const { return !touched_; }

  // Per-cell membership over the full lattice, indexed by CellId.
  const std::vector<std::uint8_t>& mask();
  BoxSet cells();

 private:
  Grid grid_;
  std::vector<std::int32_t> diff_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::uint8_t> retained_;
  bool touched_ = false;
};

}  // namespace chainrec
