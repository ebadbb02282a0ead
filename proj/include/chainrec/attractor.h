#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chainrec/chain.h"
#include "chainrec/grid.h"
#include "chainrec/words.h"

namespace chainrec {

// Evidence that U is a trapping region: every image f(h(b)) with f in G-hat,
// |f| <= L, b in U, lies one full cell layer inside U.
struct TrappingCertificate {
  BoxSet U;
  Word h;
  int L = 0;
  BoxSet image_set;
};

struct TrappingResult {
  std::optional<TrappingCertificate> certificate;
  std::optional<CellId> violating_cell;  // smallest cell of fatten0(image) outside U
  BoxSet image_set;
};

// Throws ConfigError on empty U or identity h, BudgetError over the 1e8 cap.
TrappingResult certify_trapping(const Grid& grid, const GeneratorSystem& sys, const BoxSet& U,
                                const Word& h, int L);

// Tries every nonempty h with |h| <= max_h_length in enumeration order and
// returns the first that certifies U, or the last rejection.
TrappingResult find_trapping_certificate(const Grid& grid, const GeneratorSystem& sys,
                                         const BoxSet& U, int L, int max_h_length = 2);

struct AttractorRecord {
  BoxSet A;
  BoxSet core;  // stabilized intersection before the closing cell layer
  TrappingCertificate source;
  std::uint32_t alpha0 = 0;
  BoxSet basin;
  bool stabilized = false;
  int m_used = 0;
};

// S0 = cells meeting h(U); T(S) = cells meeting f(S) over words f, |f| <= L,
// using g_alpha0 at least once; A = fatten0 of the intersection of T^m(S0),
// m = 1..m_max, stopping early once T^m(S0) = T^(m+1)(S0).
AttractorRecord compute_attractor(const Grid& grid, const GeneratorSystem& sys,
                                  const TrappingCertificate& cert, std::uint32_t alpha0, int m_max);

// Intersection over m = 1..depth_m of fatten0(R_m), where R_m holds the cells
// reached from `start` by cell-level generator steps with at least m uses of
// g_alpha0 and at most m * (L + 1) steps.
BoxSet omega_limit_cells(const Grid& grid, const GeneratorSystem& sys, const BoxSet& start,
                         std::uint32_t alpha0, int depth_m, int L);

// Cells b whose nested omega set fatten0(R_M(b)), with the single step cap
// M * (L + 1), meets A. This contains every b with omega_limit_cells({b})
// meeting A; it is computed by one backward search over (cell, count) states.
BoxSet basin(const Grid& grid, const GeneratorSystem& sys, const AttractorRecord& rec,
             std::uint32_t alpha0, int depth_m, int L);

// Same search with the cell-level image graph built once and reused.
class BasinSolver {
 public:
  BasinSolver(const Grid& grid, const GeneratorSystem& sys);
  BasinSolver(BasinSolver&&) noexcept;
  ~BasinSolver();

  BoxSet basin(const BoxSet& A, std::uint32_t alpha0, int depth_m, int L) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct DualityReport {
  BoxSet complement_cr;       // grid minus cr
  BoxSet basin_minus_attractor;  // union over attractors of B(A) minus A
  BoxSet symmetric_difference;
  // Largest Chebyshev cell distance from a mismatch to the boundary layers of
  // cr and of the basin union; 0 when there is no mismatch.
  std::uint32_t max_boundary_distance_cells = 0;
  double max_boundary_distance = 0.0;  // same, in phase-space units
  std::size_t attractor_count = 0;
  bool pass = false;

  static constexpr std::uint32_t kToleranceCells = 2;
};

DualityReport duality_report(const Grid& grid, const BoxSet& cr,
                             const std::vector<AttractorRecord>& attractors);

// Trapping region candidates: the open sublevel sets |z| < r.
std::vector<BoxSet> sublevel_candidates(const Grid& grid, const std::vector<double>& radii);

// Candidates grown from chain components: the forward cell-level closure of
// each class, thickened by one layer and re-closed up to `rounds` times.
// Duplicate candidates are dropped, so there may be fewer than classes.
std::vector<BoxSet> component_closure_candidates(const Grid& grid, const GeneratorSystem& sys,
                                                 const ChainComponents& components, int rounds = 3);

// Cells meeting the box image of b under generator i, for every generator
// and cell (cell-level image graph).
BoxSet cell_image(const Grid& grid, const GeneratorSystem& sys, const BoxSet& s,
                  std::optional<std::uint32_t> generator = std::nullopt);

// JSON record with BoxSets in the ix,iy CSV text format.
std::string attractor_to_json(const AttractorRecord& rec);

}  // namespace chainrec
