#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include <gtest/gtest.h>

#include "chainrec/attractor.h"
#include "chainrec/errors.h"

namespace chainrec {
namespace {

const IntervalBox2 kSquare = IntervalBox2::from_bounds(-1.125, 1.125, -1.125, 1.125);

GeneratorSystem powers() { return make_system({"z^2", "z^3"}, true); }

// Cells meeting the box images of s under every listed word composed with h.
BoxSet cover_of(const Grid& grid, const GeneratorSystem& sys, const BoxSet& s, const std::vector<Word>& words,
                const Word& h) {
  std::set<CellId> out;
  for (CellId b : s) {
    for (const Word& f : words) {
      const IntervalBox2 r = word_box_image(sys, f * h, grid.cell_box(b));
      for (CellId c : cells_meeting(grid, r)) out.insert(c);
    }
  }
  return BoxSet(grid, {out.begin(), out.end()});
}

// Layered (cell, capped count) reachability: R_m holds cells reached with at
// least m uses of alpha0 within m(L+1) steps.
BoxSet omega_oracle(const Grid& grid, const GeneratorSystem& sys, const BoxSet& start, std::uint32_t alpha0,
                    int M, int L) {
  const int K = M * (L + 1);
  std::set<std::pair<CellId, int>> layer;
  for (CellId c : start) layer.insert({c, 0});
  BoxSet result = BoxSet::all(grid);
  std::vector<std::set<std::pair<CellId, int>>> layers{layer};
  for (int t = 1; t <= K; ++t) {
    std::set<std::pair<CellId, int>> next;
    for (auto [c, k] : layers.back()) {
      for (std::uint32_t i = 0; i < sys.size(); ++i) {
        const int k2 = std::min(M, k + (i == alpha0 ? 1 : 0));
        for (CellId d : cells_meeting(grid, eval_box(sys.generators[i], grid.cell_box(c)))) next.insert({d, k2});
      }
    }
    layers.push_back(std::move(next));
  }
  for (int m = 1; m <= M; ++m) {
    std::set<CellId> rm;
    for (int t = 1; t <= m * (L + 1); ++t) {
      for (auto [c, k] : layers[static_cast<std::size_t>(t)]) {
        if (k >= m) rm.insert(c);
      }
    }
    result = result.intersect(fatten(BoxSet(grid, {rm.begin(), rm.end()}), 0.0));
  }
  return result;
}

TEST(Trapping, MatchesImageCoverOracle) {
  const Grid grid(kSquare, 5, Membership::disc());
  const auto sys = powers();
  const Word h0({0}, 2), h1({1, 0}, 2);
  for (double r : {0.3, 0.5, 0.7, 0.9, 1.2}) {
    const BoxSet U = disc_cells(grid, {0.0, 0.0}, r);
    for (const Word& h : {h0, h1}) {
      for (int L : {0, 1, 2}) {
        const TrappingResult res = certify_trapping(grid, sys, U, h, L);
        const BoxSet image = cover_of(grid, sys, U, enumerate_words(sys, L), h);
        EXPECT_EQ(res.image_set, image);
        const BoxSet outside = fatten(image, 0.0).subtract(U);
        EXPECT_EQ(res.certificate.has_value(), outside.empty()) << r;
        if (!outside.empty()) EXPECT_EQ(res.violating_cell, outside.ids().front());
      }
    }
  }
}

TEST(Trapping, ExampleCandidates) {
  const Grid grid(kSquare, 6, Membership::disc());
  const auto sys = powers();
  const Word h({0}, 2);
  for (double r : {0.3, 0.5, 0.7}) {
    EXPECT_TRUE(certify_trapping(grid, sys, disc_cells(grid, {0, 0}, r), h, 3).certificate.has_value()) << r;
  }
  EXPECT_TRUE(certify_trapping(grid, sys, BoxSet::all(grid), h, 3).certificate.has_value());

  // An annulus around the invariant circle |z| = 0.5 is not trapping: h maps it inward.
  BoxSet annulus = disc_cells(grid, {0, 0}, 0.7).subtract(disc_cells(grid, {0, 0}, 0.3));
  const TrappingResult bad = certify_trapping(grid, sys, annulus, h, 3);
  EXPECT_FALSE(bad.certificate.has_value());
  ASSERT_TRUE(bad.violating_cell.has_value());
  EXPECT_FALSE(annulus.contains(*bad.violating_cell));
}

TEST(Trapping, SearchFindsAWitness) {
  const Grid grid(kSquare, 5, Membership::disc());
  const auto sys = powers();
  const TrappingResult r = find_trapping_certificate(grid, sys, disc_cells(grid, {0, 0}, 0.5), 2, 2);
  ASSERT_TRUE(r.certificate.has_value());
  EXPECT_EQ(to_string(r.certificate->h), "[0]");
}

TEST(Trapping, ArgumentErrors) {
  const Grid grid(kSquare, 3, Membership::disc());
  const auto sys = powers();
  EXPECT_THROW(certify_trapping(grid, sys, BoxSet(grid), Word({0}, 2), 1), ConfigError);
  EXPECT_THROW(certify_trapping(grid, sys, BoxSet::all(grid), Word({}, 2), 1), ConfigError);
  EXPECT_THROW(certify_trapping(grid, sys, BoxSet::all(grid), Word({0}, 2), -1), ConfigError);
}

TEST(Attractor, MatchesIteratedCoverOracle) {
  const Grid grid(kSquare, 5, Membership::disc());
  const auto sys = make_system({"z^2", "0.9*z"});
  const Word h({0}, 2);
  const TrappingResult tr = certify_trapping(grid, sys, disc_cells(grid, {0, 0}, 0.6), h, 1);
  ASSERT_TRUE(tr.certificate.has_value());
  for (std::uint32_t alpha0 : {0U, 1U}) {
    const AttractorRecord rec = compute_attractor(grid, sys, *tr.certificate, alpha0, 30);

    std::vector<Word> words;
    for (const Word& w : enumerate_words(sys, 1)) {
      if (w.count(alpha0) > 0) words.push_back(w);
    }
    BoxSet current = cover_of(grid, sys, tr.certificate->U, {Word({}, 2)}, h);
    std::optional<BoxSet> inter;
    bool stable = false;
    int used = 0;
    for (int m = 1; m <= 30; ++m) {
      const BoxSet next = cover_of(grid, sys, current, words, Word({}, 2));
      inter = inter ? inter->intersect(next) : next;
      used = m;
      if (next == current) {
        stable = true;
        break;
      }
      current = next;
    }
    EXPECT_EQ(rec.core, *inter);
    EXPECT_EQ(rec.A, fatten(*inter, 0.0));
    EXPECT_EQ(rec.stabilized, stable);
    EXPECT_EQ(rec.m_used, used);
  }
}

TEST(Attractor, PowerMapsCollapseToOrigin) {
  const Grid grid(kSquare, 6, Membership::disc());
  const auto sys = powers();
  const BasinSolver solver(grid, sys);
  for (double r : {0.3, 0.5, 0.7}) {
    const BoxSet U = disc_cells(grid, {0, 0}, r);
    const TrappingResult tr = certify_trapping(grid, sys, U, Word({0}, 2), 3);
    ASSERT_TRUE(tr.certificate.has_value());
    AttractorRecord rec = compute_attractor(grid, sys, *tr.certificate, 0, 50);
    EXPECT_TRUE(rec.stabilized);
    for (CellId id : rec.A) EXPECT_LE(std::abs(grid.cell_center(id)), 2 * grid.cell_diameter());
    rec.basin = solver.basin(rec.A, 0, 4, 3);
    EXPECT_TRUE(rec.A.subset_of(U));
    EXPECT_TRUE(U.subset_of(rec.basin));
    EXPECT_EQ(rec.basin, basin(grid, sys, rec, 0, 4, 3));
  }
}

TEST(Attractor, WholeSpaceRegionGivesWholeSpace) {
  // For z^2, z^3 on the closed disc the phase space maps onto itself, so its
  // attractor is everything.
  const Grid grid(kSquare, 5, Membership::disc());
  const auto sys = powers();
  const TrappingResult tr = certify_trapping(grid, sys, BoxSet::all(grid), Word({0}, 2), 2);
  ASSERT_TRUE(tr.certificate.has_value());
  const AttractorRecord rec = compute_attractor(grid, sys, *tr.certificate, 0, 20);
  EXPECT_EQ(rec.A, BoxSet::all(grid));
}

TEST(Omega, MatchesLayeredOracle) {
  const Grid grid(kSquare, 4, Membership::disc());
  for (const auto& gens : std::vector<std::vector<std::string>>{{"z^2", "z^3"}, {"0.5*z + 0.3", "z^2 - 0.2"}}) {
    const auto sys = make_system(gens);
    for (CellId start : {grid.id({8, 8}), grid.id({12, 9}), grid.id({3, 7})}) {
      if (!grid.retained(start)) continue;
      for (int M : {1, 2, 3}) {
        for (int L : {0, 1}) {
          const BoxSet s(grid, {start});
          EXPECT_EQ(omega_limit_cells(grid, sys, s, 0, M, L), omega_oracle(grid, sys, s, 0, M, L))
              << gens[0] << " M=" << M << " L=" << L;
        }
      }
    }
  }
}

TEST(Basin, ContainsEveryCellWhoseOmegaMeetsA) {
  const Grid grid(kSquare, 5, Membership::disc());
  const auto sys = make_system({"z^2", "0.9*z"});
  const TrappingResult tr = certify_trapping(grid, sys, disc_cells(grid, {0, 0}, 0.6), Word({0}, 2), 1);
  ASSERT_TRUE(tr.certificate.has_value());
  const AttractorRecord rec = compute_attractor(grid, sys, *tr.certificate, 0, 20);
  const BoxSet b = basin(grid, sys, rec, 0, 3, 1);
  for (CellId c : BoxSet::all(grid)) {
    if (omega_limit_cells(grid, sys, BoxSet(grid, {c}), 0, 3, 1).intersects(rec.A)) {
      EXPECT_TRUE(b.contains(c)) << c;
    }
  }
  EXPECT_TRUE(rec.A.subset_of(b));
}

TEST(Duality, TrivialConfigurations) {
  const Grid grid(kSquare, 4);
  // Everything recurrent and no attractors: nothing to compare.
  const DualityReport all = duality_report(grid, BoxSet::all(grid), {});
  EXPECT_TRUE(all.pass);
  EXPECT_TRUE(all.symmetric_difference.empty());
  EXPECT_EQ(all.max_boundary_distance_cells, 0U);

  // Nothing recurrent and no attractors: every cell is a mismatch far from any boundary.
  const DualityReport none = duality_report(grid, BoxSet(grid), {});
  EXPECT_EQ(none.symmetric_difference.size(), grid.lattice_size());
  EXPECT_FALSE(none.pass);
}

TEST(Duality, DistanceIsMeasuredToBoundaryLayers) {
  const Grid grid(kSquare, 5);
  // cr is a disc; the single synthetic attractor's basin covers exactly the complement.
  const BoxSet cr = disc_cells(grid, {0, 0}, 0.4);
  const BoxSet A(grid, {*grid.locate({0.01, 0.01})});
  AttractorRecord rec{A, A, TrappingCertificate{BoxSet::all(grid), Word({0}, 1), 0, BoxSet(grid)}, 0,
                      cr.complement().unite(A), true, 1};
  const DualityReport exact = duality_report(grid, cr, {rec});
  EXPECT_TRUE(exact.symmetric_difference.empty());
  EXPECT_TRUE(exact.pass);

  // Shrink the basin by a thick ring: mismatches deep inside the ring are far from both layers.
  rec.basin = rec.basin.subtract(disc_cells(grid, {0, 0}, 1.0));
  const DualityReport off = duality_report(grid, cr, {rec});
  EXPECT_FALSE(off.symmetric_difference.empty());
  EXPECT_GT(off.max_boundary_distance_cells, DualityReport::kToleranceCells);
  EXPECT_FALSE(off.pass);
}

TEST(Candidates, SublevelAndComponentClosures) {
  const Grid grid(kSquare, 5, Membership::disc());
  const auto subs = sublevel_candidates(grid, {0.3, 0.6});
  ASSERT_EQ(subs.size(), 2U);
  EXPECT_EQ(subs[0], disc_cells(grid, {0, 0}, 0.3));
  EXPECT_TRUE(subs[0].subset_of(subs[1]));

  const auto sys = powers();
  const ChainSchedule sched{enumerate_nonempty_words(sys, 1), {0.2, 0.1}, 1};
  const ChainAnalysis an = analyze_chain_recurrence(grid, sys, sched);
  const auto grown = component_closure_candidates(grid, sys, an.components);
  ASSERT_FALSE(grown.empty());
  EXPECT_LE(grown.size(), an.components.count);
  for (const BoxSet& cls : an.components.classes()) {
    EXPECT_TRUE(std::any_of(grown.begin(), grown.end(), [&](const BoxSet& u) { return cls.subset_of(u); }));
  }
  for (std::size_t i = 0; i < grown.size(); ++i) {
    EXPECT_TRUE(cell_image(grid, sys, grown[i]).subset_of(grown[i]));  // forward closed
    for (std::size_t j = 0; j < i; ++j) EXPECT_NE(grown[i], grown[j]);
  }
}

TEST(CellImage, MatchesPerGeneratorCovers) {
  const Grid grid(kSquare, 4, Membership::disc());
  const auto sys = powers();
  const BoxSet s = disc_cells(grid, {0.2, 0.1}, 0.3);
  BoxSet both(grid);
  for (std::uint32_t i = 0; i < 2; ++i) {
    const BoxSet one = cover_of(grid, sys, s, {Word({i}, 2)}, Word({}, 2));
    EXPECT_EQ(cell_image(grid, sys, s, i), one);
    both = both.unite(one);
  }
  EXPECT_EQ(cell_image(grid, sys, s), both);
}

TEST(AttractorJson, HasExpectedFields) {
  const Grid grid(kSquare, 5, Membership::disc());
  const auto sys = powers();
  const TrappingResult tr = certify_trapping(grid, sys, disc_cells(grid, {0, 0}, 0.5), Word({0}, 2), 1);
  ASSERT_TRUE(tr.certificate.has_value());
  const AttractorRecord rec = compute_attractor(grid, sys, *tr.certificate, 0, 10);
  const auto j = nlohmann::json::parse(attractor_to_json(rec));
  for (const char* k : {"certificate", "alpha0", "A", "basin", "stabilized", "m_used"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["certificate"]["h"], "[0]");
}

}  // namespace
}  // namespace chainrec
