#include "chainrec/grid.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "chainrec/errors.h"

namespace chainrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint32_t clamp_index(double t, std::uint32_t side) {
  if (!(t > 0.0)) return 0;
  if (t >= static_cast<double>(side - 1)) return side - 1;
  return static_cast<std::uint32_t>(t);
}

// 1-D squared Euclidean distance transform over samples spaced `spacing`
// apart (lower envelope of parabolas).
void distance_transform_1d(const double* f, double* d, std::size_t n, std::size_t stride,
                           double spacing, std::vector<std::size_t>& v, std::vector<double>& z) {
  v.clear();
  z.clear();
  auto at = [&](std::size_t i) { return f[i * stride]; };
  auto pos = [&](std::size_t i) { return static_cast<double>(i) * spacing; };
  for (std::size_t q = 0; q < n; ++q) {
    if (!std::isfinite(at(q))) continue;
    for (;;) {
      if (v.empty()) {
        v.push_back(q);
        z.push_back(-kInf);
        break;
      }
      const std::size_t p = v.back();
      const double s = ((at(q) + pos(q) * pos(q)) - (at(p) + pos(p) * pos(p))) /
                       (2.0 * (pos(q) - pos(p)));
      if (s <= z.back()) {
        v.pop_back();
        z.pop_back();
        continue;
      }
      v.push_back(q);
      z.push_back(s);
      break;
    }
  }
  if (v.empty()) {
    for (std::size_t q = 0; q < n; ++q) d[q * stride] = kInf;
    return;
  }
  std::size_t k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (k + 1 < v.size() && z[k + 1] < pos(q)) ++k;
    const double diff = pos(q) - pos(v[k]);
    d[q * stride] = diff * diff + at(v[k]);
  }
}

std::vector<std::uint8_t> dense_mask(const BoxSet& s) {
  s.grid().require_dense("dense cell mask");
  std::vector<std::uint8_t> mask(s.grid().lattice_size(), 0);
  for (CellId id : s) mask[id] = 1;
  return mask;
}

}  // namespace

Grid::Grid(const IntervalBox2& bounds, int depth, Membership membership)
    : bounds_(bounds), depth_(depth), membership_(membership) {
  if (depth < 0 || depth > kMaxDepth) {
    throw ConfigError("grid depth must lie in [0, " + std::to_string(kMaxDepth) + "]");
  }
  if (!bounds.bounded() || !(bounds.re.lo < bounds.re.hi) || !(bounds.im.lo < bounds.im.hi)) {
    throw ConfigError("grid bounds must be finite with lo < hi");
  }
  if (membership.kind == Membership::Kind::kDisc && !(membership.radius > 0.0)) {
    throw ConfigError("disc membership radius must be positive");
  }
  cell_w_ = (bounds.re.hi - bounds.re.lo) / side();
  cell_h_ = (bounds.im.hi - bounds.im.lo) / side();
}

double Grid::cell_diameter() const { return std::hypot(cell_w_, cell_h_); }

bool Grid::retained(Cell c) const {
  if (membership_.kind == Membership::Kind::kRect) return true;
  return cell_box(c).distance_squared(IntervalBox2::point(membership_.center)) <=
         membership_.radius * membership_.radius;
}

std::optional<CellRange> Grid::cells_meeting(const IntervalBox2& r) const {
  if (!r.valid()) return std::nullopt;
  const std::uint32_t n = side();
  auto lower = [n](double lo, double origin, double step, auto coord) -> std::uint32_t {
    std::uint32_t i = clamp_index(std::floor((lo - origin) / step), n);
    while (i > 0 && coord(i) >= lo) --i;
    while (i < n && coord(i + 1) < lo) ++i;
    return i;
  };
  auto upper = [n](double hi, double origin, double step, auto coord) -> std::int64_t {
    std::int64_t i = clamp_index(std::floor((hi - origin) / step), n);
    while (i + 1 < n && coord(static_cast<std::uint32_t>(i + 1)) <= hi) ++i;
    while (i >= 0 && coord(static_cast<std::uint32_t>(i)) > hi) --i;
    return i;
  };
  auto xc = [this](std::uint32_t i) { return x_at(i); };
  auto yc = [this](std::uint32_t i) { return y_at(i); };
  const std::uint32_t ix0 = lower(r.re.lo, bounds_.re.lo, cell_w_, xc);
  const std::int64_t ix1 = upper(r.re.hi, bounds_.re.lo, cell_w_, xc);
  const std::uint32_t iy0 = lower(r.im.lo, bounds_.im.lo, cell_h_, yc);
  const std::int64_t iy1 = upper(r.im.hi, bounds_.im.lo, cell_h_, yc);
  if (ix0 >= n || iy0 >= n || ix1 < ix0 || iy1 < iy0) return std::nullopt;
  return CellRange{ix0, static_cast<std::uint32_t>(ix1), iy0, static_cast<std::uint32_t>(iy1)};
}

std::optional<CellId> Grid::locate(Point p) const {
  const auto range = cells_meeting(IntervalBox2::point(p));
  if (!range) return std::nullopt;
  for (std::uint32_t iy = range->iy0; iy <= range->iy1; ++iy) {
    for (std::uint32_t ix = range->ix0; ix <= range->ix1; ++ix) {
      if (retained(Cell{ix, iy})) return id(Cell{ix, iy});
    }
  }
  return std::nullopt;
}

void Grid::require_dense(const char* what) const {
  if (depth_ > kMaxDenseDepth) {
    throw BudgetError(std::string(what) + " needs a dense lattice buffer; depth " +
                      std::to_string(depth_) + " exceeds " + std::to_string(kMaxDenseDepth));
  }
}

// ---------------------------------------------------------------- BoxSet

BoxSet::BoxSet(Grid grid, std::vector<CellId> ids) : grid_(std::move(grid)), ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  for (CellId id : ids_) {
    if (id >= grid_.lattice_size() || !grid_.retained(id)) {
      throw ConfigError("cell id " + std::to_string(id) + " is not a retained grid cell");
    }
  }
}

BoxSet BoxSet::from_sorted(Grid grid, std::vector<CellId> ids) {
  BoxSet s(std::move(grid));
  s.ids_ = std::move(ids);
  return s;
}

BoxSet BoxSet::all(const Grid& grid) {
  grid.require_dense("enumerating all cells");
  std::vector<CellId> ids;
  const std::uint32_t n = grid.side();
  if (grid.membership().kind == Membership::Kind::kRect) {
    ids.resize(grid.lattice_size());
    for (CellId i = 0; i < ids.size(); ++i) ids[i] = i;
  } else {
    for (std::uint32_t iy = 0; iy < n; ++iy) {
      for (std::uint32_t ix = 0; ix < n; ++ix) {
        if (grid.retained(Cell{ix, iy})) ids.push_back(grid.id(Cell{ix, iy}));
      }
    }
  }
  return from_sorted(grid, std::move(ids));
}

bool BoxSet::contains(CellId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

void BoxSet::check_same_grid(const BoxSet& o) const {
  if (!(grid_ == o.grid_)) throw std::invalid_argument("BoxSet operands live on different grids");
}

BoxSet BoxSet::unite(const BoxSet& o) const {
  check_same_grid(o);
  std::vector<CellId> out;
  out.reserve(ids_.size() + o.ids_.size());
  std::set_union(ids_.begin(), ids_.end(), o.ids_.begin(), o.ids_.end(), std::back_inserter(out));
  return from_sorted(grid_, std::move(out));
}

BoxSet BoxSet::intersect(const BoxSet& o) const {
  check_same_grid(o);
  std::vector<CellId> out;
  std::set_intersection(ids_.begin(), ids_.end(), o.ids_.begin(), o.ids_.end(),
                        std::back_inserter(out));
  return from_sorted(grid_, std::move(out));
}

BoxSet BoxSet::subtract(const BoxSet& o) const {
  check_same_grid(o);
  std::vector<CellId> out;
  std::set_difference(ids_.begin(), ids_.end(), o.ids_.begin(), o.ids_.end(),
                      std::back_inserter(out));
  return from_sorted(grid_, std::move(out));
}

BoxSet BoxSet::complement() const { return all(grid_).subtract(*this); }

BoxSet BoxSet::symmetric_difference(const BoxSet& o) const {
  check_same_grid(o);
  std::vector<CellId> out;
  std::set_symmetric_difference(ids_.begin(), ids_.end(), o.ids_.begin(), o.ids_.end(),
                                std::back_inserter(out));
  return from_sorted(grid_, std::move(out));
}

bool BoxSet::subset_of(const BoxSet& o) const {
  check_same_grid(o);
  return std::includes(o.ids_.begin(), o.ids_.end(), ids_.begin(), ids_.end());
}

bool BoxSet::intersects(const BoxSet& o) const {
  check_same_grid(o);
  auto a = ids_.begin();
  auto b = o.ids_.begin();
  while (a != ids_.end() && b != o.ids_.end()) {
    if (*a == *b) return true;
    if (*a < *b) {
      ++a;
    } else {
      ++b;
    }
  }
  return false;
}

double BoxSet::area() const {
  return static_cast<double>(ids_.size()) * grid_.cell_width() * grid_.cell_height();
}

// ------------------------------------------------------------- operations

BoxSet cover_predicate(const Grid& grid, const PointPredicate& pred, int samples_per_cell) {
  if (samples_per_cell < 1) throw ConfigError("samples_per_cell must be >= 1");
  grid.require_dense("cover_predicate");
  const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(samples_per_cell))));
  std::vector<CellId> ids;
  const std::uint32_t n = grid.side();
  for (std::uint32_t iy = 0; iy < n; ++iy) {
    for (std::uint32_t ix = 0; ix < n; ++ix) {
      const Cell c{ix, iy};
      if (!grid.retained(c)) continue;
      for (int k = 0; k < samples_per_cell; ++k) {
        const double u = ((k % m) + 0.5) / m;
        const double v = ((k / m) + 0.5) / m;
        const Point p{grid.x_at(ix) + u * grid.cell_width(), grid.y_at(iy) + v * grid.cell_height()};
        if (pred(p)) {
          ids.push_back(grid.id(c));
          break;
        }
      }
    }
  }
  return BoxSet::from_sorted(grid, std::move(ids));
}

BoxSet disc_cells(const Grid& grid, Point center, double radius) {
  const IntervalBox2 hull{{center.real() - radius, center.real() + radius},
                          {center.imag() - radius, center.imag() + radius}};
  const auto range = grid.cells_meeting(hull);
  std::vector<CellId> ids;
  if (range) {
    const IntervalBox2 c = IntervalBox2::point(center);
    for (std::uint32_t iy = range->iy0; iy <= range->iy1; ++iy) {
      for (std::uint32_t ix = range->ix0; ix <= range->ix1; ++ix) {
        const Cell cell{ix, iy};
        if (grid.retained(cell) && grid.cell_box(cell).distance_squared(c) < radius * radius) {
          ids.push_back(grid.id(cell));
        }
      }
    }
  }
  return BoxSet::from_sorted(grid, std::move(ids));
}

BoxSet cells_meeting(const Grid& grid, const IntervalBox2& r) {
  const auto range = grid.cells_meeting(r);
  std::vector<CellId> ids;
  if (range) {
    for (std::uint32_t iy = range->iy0; iy <= range->iy1; ++iy) {
      for (std::uint32_t ix = range->ix0; ix <= range->ix1; ++ix) {
        if (grid.retained(Cell{ix, iy})) ids.push_back(grid.id(Cell{ix, iy}));
      }
    }
  }
  return BoxSet::from_sorted(grid, std::move(ids));
}

BoxSet fatten(const BoxSet& s, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("fatten: eps must be >= 0");
  const Grid& grid = s.grid();
  if (s.empty()) return BoxSet(grid);
  const double w = grid.cell_width();
  const double h = grid.cell_height();
  const auto n = static_cast<std::int64_t>(grid.side());
  const std::int64_t rx = std::min<std::int64_t>(n, 1 + static_cast<std::int64_t>(std::ceil(eps / w)));
  const std::int64_t ry = std::min<std::int64_t>(n, 1 + static_cast<std::int64_t>(std::ceil(eps / h)));
  std::vector<std::pair<std::int64_t, std::int64_t>> stencil;
  for (std::int64_t dy = -ry; dy <= ry; ++dy) {
    for (std::int64_t dx = -rx; dx <= rx; ++dx) {
      const double gx = static_cast<double>(std::max<std::int64_t>(0, std::abs(dx) - 1)) * w;
      const double gy = static_cast<double>(std::max<std::int64_t>(0, std::abs(dy) - 1)) * h;
      if (gx * gx + gy * gy <= eps * eps) stencil.emplace_back(dx, dy);
    }
  }
  grid.require_dense("fatten");
  std::vector<std::uint8_t> mask(grid.lattice_size(), 0);
  for (CellId id : s) {
    const Cell c = grid.cell(id);
    for (auto [dx, dy] : stencil) {
      const std::int64_t x = c.ix + dx;
      const std::int64_t y = c.iy + dy;
      if (x < 0 || y < 0 || x >= n || y >= n) continue;
      mask[grid.id(Cell{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)})] = 1;
    }
  }
  std::vector<CellId> ids;
  for (CellId id = 0; id < mask.size(); ++id) {
    if (mask[id] && grid.retained(id)) ids.push_back(id);
  }
  return BoxSet::from_sorted(grid, std::move(ids));
}

std::vector<double> distance_transform(const BoxSet& s) {
  const Grid& grid = s.grid();
  grid.require_dense("distance_transform");
  const std::size_t n = grid.side();
  std::vector<double> f(grid.lattice_size(), kInf);
  for (CellId id : s) f[id] = 0.0;
  std::vector<double> tmp(f.size());
  std::vector<std::size_t> v;
  std::vector<double> z;
  for (std::size_t row = 0; row < n; ++row) {
    distance_transform_1d(f.data() + row * n, tmp.data() + row * n, n, 1, grid.cell_width(), v, z);
  }
  for (std::size_t col = 0; col < n; ++col) {
    distance_transform_1d(tmp.data() + col, f.data() + col, n, n, grid.cell_height(), v, z);
  }
  return f;
}

double directed_hausdorff(const BoxSet& a, const BoxSet& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff: empty operand");
  if (!(a.grid() == b.grid())) throw std::invalid_argument("hausdorff: different grids");
  const std::vector<double> dt = distance_transform(b);
  double worst = 0.0;
  for (CellId id : a) worst = std::max(worst, dt[id]);
  return std::sqrt(worst);
}

double hausdorff(const BoxSet& a, const BoxSet& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double hausdorff(const BoxSet& a, std::span<const Point> points) {
  if (a.empty() || points.empty()) throw std::invalid_argument("hausdorff: empty operand");
  std::vector<Point> centers;
  centers.reserve(a.size());
  for (CellId id : a) centers.push_back(a.grid().cell_center(id));
  auto nearest2 = [](Point q, std::span<const Point> set) {
    double best = kInf;
    for (const Point& p : set) best = std::min(best, std::norm(p - q));
    return best;
  };
  double worst = 0.0;
  for (const Point& c : centers) worst = std::max(worst, nearest2(c, points));
  for (const Point& p : points) worst = std::max(worst, nearest2(p, centers));
  return std::sqrt(worst);
}

BoxSet boundary_layer(const BoxSet& s) {
  const Grid& grid = s.grid();
  const std::vector<std::uint8_t> mask = dense_mask(s);
  const auto n = static_cast<std::int64_t>(grid.side());
  std::vector<CellId> ids;
  for (std::int64_t y = 0; y < n; ++y) {
    for (std::int64_t x = 0; x < n; ++x) {
      const Cell c{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)};
      if (!grid.retained(c)) continue;
      const bool inside = mask[grid.id(c)] != 0;
      bool differs = false;
      for (std::int64_t dy = -1; dy <= 1 && !differs; ++dy) {
        for (std::int64_t dx = -1; dx <= 1 && !differs; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const std::int64_t xx = x + dx;
          const std::int64_t yy = y + dy;
          bool neighbour_inside = false;
          if (xx >= 0 && yy >= 0 && xx < n && yy < n) {
            neighbour_inside =
                mask[grid.id(Cell{static_cast<std::uint32_t>(xx), static_cast<std::uint32_t>(yy)})] != 0;
          }
          differs = neighbour_inside != inside;
        }
      }
      if (differs) ids.push_back(grid.id(c));
    }
  }
  return BoxSet::from_sorted(grid, std::move(ids));
}

// -------------------------------------------------------------- RectCover

RectCover::RectCover(const Grid& grid) : grid_(grid) {
  grid_.require_dense("RectCover");
  const std::size_t n = grid_.side() + 1;
  diff_.assign(n * n, 0);
  mask_.assign(grid_.lattice_size(), 0);
  retained_.assign(grid_.lattice_size(), 1);
  if (grid_.membership().kind != Membership::Kind::kRect) {
    for (CellId id = 0; id < retained_.size(); ++id) retained_[id] = grid_.retained(id);
  }
}

void RectCover::add(const IntervalBox2& r) {
  const auto range = grid_.cells_meeting(r);
  if (!range) return;
  const std::size_t n = grid_.side() + 1;
  diff_[range->iy0 * n + range->ix0] += 1;
  diff_[range->iy0 * n + range->ix1 + 1] -= 1;
  diff_[(range->iy1 + 1) * n + range->ix0] -= 1;
  diff_[(range->iy1 + 1) * n + range->ix1 + 1] += 1;
  touched_ = true;
}

void RectCover::reset() {
  if (!touched_) return;
  std::fill(diff_.begin(), diff_.end(), 0);
  touched_ = false;
}

const std::vector<std::uint8_t>& RectCover::mask() {
  const std::size_t side = grid_.side();
  const std::size_t n = side + 1;
  if (!touched_) {
    std::fill(mask_.begin(), mask_.end(), 0);
    return mask_;
  }
  // 2-D inclusive prefix sum of the difference array.
  std::vector<std::int32_t> col(side, 0);
  for (std::size_t y = 0; y < side; ++y) {
    std::int32_t run = 0;
    for (std::size_t x = 0; x < side; ++x) {
      run += diff_[y * n + x];
      col[x] += run;
      const std::size_t id = y * side + x;
      mask_[id] = col[x] > 0 && retained_[id];
    }
  }
  return mask_;
}

BoxSet RectCover::cells() {
  const std::vector<std::uint8_t>& m = mask();
  std::vector<CellId> ids;
  for (CellId id = 0; id < m.size(); ++id) {
    if (m[id]) ids.push_back(id);
  }
  return BoxSet::from_sorted(grid_, std::move(ids));
}

}  // namespace chainrec
