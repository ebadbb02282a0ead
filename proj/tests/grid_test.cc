#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "chainrec/boxset_io.h"
#include "chainrec/errors.h"
#include "chainrec/grid.h"

namespace chainrec {
namespace {

const IntervalBox2 kSquare = IntervalBox2::from_bounds(-1.125, 1.125, -1.125, 1.125);

BoxSet random_set(const Grid& grid, std::mt19937_64& rng, double density) {
  std::bernoulli_distribution keep(density);
  std::vector<CellId> ids;
  for (CellId id : BoxSet::all(grid)) {
    if (keep(rng)) ids.push_back(id);
  }
  return BoxSet(grid, ids);
}

double box_distance(const IntervalBox2& a, const IntervalBox2& b) {
  const double dx = std::max({0.0, a.re.lo - b.re.hi, b.re.lo - a.re.hi});
  const double dy = std::max({0.0, a.im.lo - b.im.hi, b.im.lo - a.im.hi});
  return std::hypot(dx, dy);
}

TEST(Grid, GeometryAndIds) {
  const Grid g(kSquare, 3);
  EXPECT_EQ(g.side(), 8U);
  EXPECT_DOUBLE_EQ(g.cell_width(), 2.25 / 8);
  const Cell c{3, 5};
  EXPECT_EQ(g.cell(g.id(c)), c);
  EXPECT_EQ(g.id(c), (5U << 3) | 3U);
  const IntervalBox2 b = g.cell_box(c);
  EXPECT_DOUBLE_EQ(b.re.lo, -1.125 + 3 * 2.25 / 8);
  EXPECT_NEAR(g.cell_diameter(), std::hypot(2.25 / 8, 2.25 / 8), 1e-15);
}

TEST(Grid, RejectsBadConstruction) {
  EXPECT_ANY_THROW(Grid(kSquare, Grid::kMaxDepth + 1));
  EXPECT_ANY_THROW(Grid(IntervalBox2::from_bounds(1, 0, 0, 1), 2));
}

TEST(Grid, DiscMembershipRetainsCellsMeetingTheDisc) {
  const Grid g(kSquare, 5, Membership::disc());
  for (CellId id = 0; id < g.lattice_size(); ++id) {
    const IntervalBox2 b = g.cell_box(id);
    const double nx = std::clamp(0.0, b.re.lo, b.re.hi);
    const double ny = std::clamp(0.0, b.im.lo, b.im.hi);
    EXPECT_EQ(g.retained(id), std::hypot(nx, ny) <= 1.0) << id;
  }
  // Corner cells are trimmed, the center cells kept.
  EXPECT_FALSE(g.retained(Cell{0, 0}));
  EXPECT_TRUE(g.retained(Cell{16, 16}));
}

TEST(Grid, LocateAndCellsMeeting) {
  const Grid g(kSquare, 4);
  const auto id = g.locate({0.01, -0.01});
  ASSERT_TRUE(id.has_value());
  EXPECT_TRUE(g.cell_box(*id).contains({0.01, -0.01}));
  EXPECT_FALSE(g.locate({5.0, 0.0}).has_value());

  const IntervalBox2 r = IntervalBox2::from_bounds(-0.1, 0.3, 0.2, 0.25);
  const BoxSet met = cells_meeting(g, r);
  for (CellId c = 0; c < g.lattice_size(); ++c) {
    EXPECT_EQ(met.contains(c), g.cell_box(c).intersects(r)) << c;
  }
}

TEST(BoxSet, AlgebraMatchesStdSet) {
  std::mt19937_64 rng(5);
  const Grid g(kSquare, 4, Membership::disc());
  for (int trial = 0; trial < 50; ++trial) {
    const BoxSet a = random_set(g, rng, 0.4);
    const BoxSet b = random_set(g, rng, 0.4);
    std::set<CellId> sa(a.begin(), a.end()), sb(b.begin(), b.end()), all;
    for (CellId id : BoxSet::all(g)) all.insert(id);
    std::vector<CellId> u, i, d, x, c;
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(u));
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(i));
    std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(d));
    std::set_symmetric_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(x));
    std::set_difference(all.begin(), all.end(), sa.begin(), sa.end(), std::back_inserter(c));
    EXPECT_EQ(a.unite(b).ids(), u);
    EXPECT_EQ(a.intersect(b).ids(), i);
    EXPECT_EQ(a.subtract(b).ids(), d);
    EXPECT_EQ(a.symmetric_difference(b).ids(), x);
    EXPECT_EQ(a.complement().ids(), c);
    EXPECT_EQ(a.subset_of(b), std::includes(sb.begin(), sb.end(), sa.begin(), sa.end()));
    EXPECT_EQ(a.intersects(b), !i.empty());
    EXPECT_TRUE(a.intersect(b).subset_of(a));
  }
}

TEST(BoxSet, ConstructorSortsAndRejectsTrimmedCells) {
  const Grid g(kSquare, 3, Membership::disc());
  const BoxSet s(g, {g.id({4, 4}), g.id({3, 4}), g.id({4, 4})});
  EXPECT_EQ(s.size(), 2U);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_ANY_THROW(BoxSet(g, {g.id({0, 0})}));
}

TEST(BoxSet, MixingGridsThrows) {
  const BoxSet a = BoxSet::all(Grid(kSquare, 2));
  const BoxSet b = BoxSet::all(Grid(kSquare, 3));
  EXPECT_ANY_THROW(a.unite(b));
}

TEST(Fatten, ZeroAddsTheEightNeighbours) {
  const Grid g(kSquare, 4);
  const BoxSet s(g, {g.id({5, 7})});
  const BoxSet f = fatten(s, 0.0);
  EXPECT_EQ(f.size(), 9U);
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) EXPECT_TRUE(f.contains(g.id({5U + dx, 7U + dy})));
  }
  // At the lattice edge the neighbourhood is clipped.
  EXPECT_EQ(fatten(BoxSet(g, {g.id({0, 0})}), 0.0).size(), 4U);
}

TEST(Fatten, MatchesBoxDistanceOracle) {
  std::mt19937_64 rng(8);
  const Grid g(kSquare, 4, Membership::disc());
  for (double eps : {0.0, 0.1, 0.3}) {
    const BoxSet s = random_set(g, rng, 0.05);
    const BoxSet f = fatten(s, eps);
    for (CellId c : BoxSet::all(g)) {
      bool near = false;
      for (CellId m : s) near = near || box_distance(g.cell_box(c), g.cell_box(m)) <= eps + 1e-12;
      EXPECT_EQ(f.contains(c), near) << "eps " << eps << " cell " << c;
    }
  }
}

TEST(DistanceTransform, MatchesBruteForce) {
  std::mt19937_64 rng(9);
  const Grid g(kSquare, 4);
  const BoxSet s = random_set(g, rng, 0.1);
  const auto dt = distance_transform(s);
  ASSERT_EQ(dt.size(), g.lattice_size());
  for (CellId c = 0; c < g.lattice_size(); ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (CellId m : s) best = std::min(best, std::norm(g.cell_center(c) - g.cell_center(m)));
    EXPECT_NEAR(dt[c], best, 1e-12) << c;
  }
}

TEST(Hausdorff, KnownValuesAndSymmetry) {
  const Grid g(kSquare, 3);
  const BoxSet a(g, {g.id({0, 0})});
  const BoxSet b(g, {g.id({3, 0})});
  const double w = g.cell_width();
  EXPECT_NEAR(hausdorff(a, b), 3 * w, 1e-12);
  EXPECT_NEAR(hausdorff(a, a.unite(b)), 3 * w, 1e-12);
  EXPECT_NEAR(directed_hausdorff(a, a.unite(b)), 0.0, 1e-12);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const BoxSet x = random_set(g, rng, 0.3), y = random_set(g, rng, 0.3);
    if (x.empty() || y.empty()) continue;
    EXPECT_DOUBLE_EQ(hausdorff(x, y), hausdorff(y, x));
  }
  EXPECT_ANY_THROW(hausdorff(BoxSet(g), a));
}

TEST(BoundaryLayer, MatchesNeighbourDefinition) {
  std::mt19937_64 rng(4);
  const Grid g(kSquare, 4);
  const BoxSet s = random_set(g, rng, 0.5);
  const BoxSet layer = boundary_layer(s);
  const int n = static_cast<int>(g.side());
  for (CellId c : BoxSet::all(g)) {
    const Cell cc = g.cell(c);
    bool differs = false;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        const int x = static_cast<int>(cc.ix) + dx, y = static_cast<int>(cc.iy) + dy;
        const bool in = x >= 0 && y >= 0 && x < n && y < n &&
                        s.contains(g.id({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)}));
        differs = differs || in != s.contains(c);
      }
    }
    EXPECT_EQ(layer.contains(c), differs) << c;
  }
}

TEST(RectCover, MatchesCellsMeetingUnion) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const Grid g(kSquare, 5, Membership::disc());
  RectCover cover(g);
  for (int trial = 0; trial < 20; ++trial) {
    cover.reset();
    EXPECT_TRUE(cover.empty());
    BoxSet expect(g);
    for (int r = 0; r < 6; ++r) {
      double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
      const IntervalBox2 rect =
          IntervalBox2::from_bounds(std::min(a, b), std::max(a, b), std::min(c, d), std::max(c, d));
      cover.add(rect);
      expect = expect.unite(cells_meeting(g, rect));
    }
    EXPECT_EQ(cover.cells(), expect);
  }
}

TEST(DiscCells, OpenDiscSemantics) {
  const Grid g(kSquare, 5);
  const BoxSet d = disc_cells(g, {0.0, 0.0}, 0.5);
  for (CellId c : BoxSet::all(g)) {
    const IntervalBox2 b = g.cell_box(c);
    const double nx = std::clamp(0.0, b.re.lo, b.re.hi), ny = std::clamp(0.0, b.im.lo, b.im.hi);
    EXPECT_EQ(d.contains(c), std::hypot(nx, ny) < 0.5) << c;
  }
}

TEST(BoxSetIo, CsvRoundTrip) {
  std::mt19937_64 rng(6);
  const Grid g(kSquare, 5, Membership::disc());
  const BoxSet s = random_set(g, rng, 0.2);
  const std::string text = to_csv(s);
  EXPECT_EQ(text.rfind("ix,iy\n", 0), 0U);
  std::istringstream in(text);
  EXPECT_EQ(boxset_from_csv(g, in), s);

  std::istringstream bad("ix,iy\n1,notanumber\n");
  EXPECT_THROW(boxset_from_csv(g, bad), ConfigError);
  std::istringstream outside("ix,iy\n99,0\n");
  EXPECT_THROW(boxset_from_csv(g, outside), ConfigError);
}

TEST(BoxSetIo, GridJsonRoundTrip) {
  const Grid g(kSquare, 6, Membership::disc({0.1, 0.0}, 0.9));
  EXPECT_EQ(grid_from_json(grid_to_json(g)), g);
  const Grid r(IntervalBox2::from_bounds(0, 2, -1, 1), 3);
  EXPECT_EQ(grid_from_json(grid_to_json(r)), r);
}

TEST(BoxSetIo, PgmHeaderAndOrientation) {
  const Grid g(kSquare, 2);
  const BoxSet s(g, {g.id({0, 3})});  // top-left pixel
  const auto path = std::filesystem::temp_directory_path() / "chainrec_grid_test.pgm";
  write_pgm(path, s);
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "P5\n4 4\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 16);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size()]), 255);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 15]), 0);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace chainrec
