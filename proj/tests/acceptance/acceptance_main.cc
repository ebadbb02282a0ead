// End-to-end acceptance run: one PASS/FAIL line per criterion, exit 1 on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chainrec/boxset_io.h"
#include "chainrec/chain.h"
#include "chainrec/scenario.h"
#include "test_support.h"

namespace {

namespace fs = std::filesystem;
using namespace chainrec;

int failures = 0;

void verdict(int n, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// {0} together with 512 equally spaced points of the unit circle.
std::vector<Point> reference_points() {
  std::vector<Point> pts{{0.0, 0.0}};
  for (int k = 0; k < 512; ++k) pts.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / 512.0));
  return pts;
}

// Chebyshev-free distance of a cell center to the nearer of |z| = 0 and |z| = 1, in cell widths.
double locus_distance_cells(const Grid& grid, CellId id) {
  const double r = std::abs(grid.cell_center(id));
  return std::min(r, std::abs(r - 1.0)) / grid.cell_width();
}

}  // namespace

int main() {
  const fs::path src = CHAINREC_SOURCE_DIR;
  const fs::path out = CHAINREC_ACCEPTANCE_OUT;
  fs::remove_all(out);
  const Scenario sc = load_scenario(src / "scenarios" / "unit_disc_powers.json");
  const Grid grid = sc.grid();
  const auto ref = reference_points();

  // ---- 1: chain recurrent set of the power maps on the unit disc.
  auto t0 = std::chrono::steady_clock::now();
  const AnalysisReport run1 = run_duality(sc, {out / "run1", 0, false, false});
  const double t_run = seconds_since(t0);
  const BoxSet& cr = run1.chain->cr;
  const double h9 = hausdorff(cr, ref);
  double cr_time = 0.0, att_time = 0.0;
  for (const auto& [k, v] : run1.timings) {
    if (k == "cr") cr_time = v;
    if (k == "attractors") att_time = v;
  }
  verdict(1, h9 <= 0.05,
          fmt("hausdorff=%.4f limit=0.05 depth=%d cr_cells=%zu components=%zu cr_time=%.1fs", h9, sc.depth,
              cr.size(), run1.chain->components.count, cr_time));

  // ---- 2 and 4: disc candidates certify with h = z^2, attractor at the origin, basin covers |z| <= 0.95.
  const auto& stage = *run1.attractors;
  bool ok2 = true, ok4 = true;
  std::string d2, d4;
  std::size_t inner_cells = 0;
  std::vector<CellId> inner;
  for (CellId id : BoxSet::all(grid)) {
    const IntervalBox2 b = grid.cell_box(id);
    const double fx = std::max(std::abs(b.re.lo), std::abs(b.re.hi));
    const double fy = std::max(std::abs(b.im.lo), std::abs(b.im.hi));
    if (std::hypot(fx, fy) <= 0.95) inner.push_back(id);
  }
  const BoxSet inside095 = BoxSet::from_sorted(grid, inner);
  inner_cells = inside095.size();
  int discs = 0;
  for (const auto& o : stage.outcomes) {
    if (o.label.rfind("disc", 0) != 0) continue;
    ++discs;
    const bool certified = o.trapping.certificate.has_value() && to_string(o.trapping.certificate->h) == "[0]";
    if (!certified || !o.attractor) {
      ok2 = ok4 = false;
      d2 += " [" + o.label + " not certified]";
      continue;
    }
    const AttractorRecord& a = *o.attractor;
    double far = 0.0;
    for (CellId id : a.A) far = std::max(far, std::abs(grid.cell_center(id)));
    const double far_diam = far / grid.cell_diameter();
    const std::size_t missing = inside095.subtract(a.basin).size();
    ok2 = ok2 && far_diam <= 2.0 && missing == 0;
    d2 += fmt(" [%s: A=%zu cells, max |center|=%.2f diam, basin misses %zu of %zu inner cells]", o.label.c_str(),
              a.A.size(), far_diam, missing, inner_cells);
    const bool in_u = a.A.subset_of(o.U);
    const bool u_in_b = o.U.subset_of(a.basin);
    ok4 = ok4 && in_u && u_in_b;
    d4 += fmt(" [%s: A in U %s, U in B(A) %s]", o.label.c_str(), in_u ? "yes" : "no", u_in_b ? "yes" : "no");
  }
  ok2 = ok2 && discs == 3;
  ok4 = ok4 && discs == 3;
  verdict(2, ok2, fmt("attractor_time=%.1fs", att_time) + d2);

  // ---- 3: grid-level duality. The verdict uses the boundary layers of the
  // computed CR and basin union; the distance to the true loci is reported too.
  const DualityReport& dual = *run1.duality;
  double locus = 0.0;
  for (CellId id : dual.symmetric_difference) locus = std::max(locus, locus_distance_cells(grid, id));
  verdict(3, dual.pass,
          fmt("mismatch=%zu cells, max distance to computed boundary layers=%u cells (limit %u), "
              "attractors=%zu, max distance to |z|=0 or |z|=1 loci=%.2f cells (final eps=%.3f is %.1f cells)",
              dual.symmetric_difference.size(), dual.max_boundary_distance_cells, DualityReport::kToleranceCells,
              dual.attractor_count, locus, sc.eps_schedule.back(), sc.eps_schedule.back() / grid.cell_width()));

  verdict(4, ok4, d4);

  // ---- 5: finite-oracle sweep.
  t0 = std::chrono::steady_clock::now();
  const auto sweep = run_oracle_sweep(200, 6, true, 0, out / "oracle");
  const double t_oracle = seconds_since(t0);
  bool ok5 = sweep["skipped"] == 0 && sweep["failed"] == 0 && sweep["passed"] == 200;
  std::string d5 = fmt("time=%.1fs", t_oracle);
  for (const auto& [name, c] : sweep["properties"].items()) {
    const auto pass = c["pass"].get<std::size_t>(), fail = c["fail"].get<std::size_t>();
    d5 += fmt(" %s=%zu/%zu", name.c_str(), pass, pass + fail);
    ok5 = ok5 && fail == 0;
    // Properties asserted for every abelian seed must have run on all 200.
    if (name != "topological_implies_chain") ok5 = ok5 && pass == 200;
  }
  verdict(5, ok5, d5);

  // ---- 6: enclosure soundness on random expressions.
  t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(6);
  std::size_t escapes = 0, samples = 0;
  for (int e = 0; e < 100; ++e) {
    const MapExpr expr = parse_map_expr(testing::random_expr(rng, 4));
    for (int b = 0; b < 100; ++b) {
      const IntervalBox2 box = testing::random_box(rng);
      const IntervalBox2 img = eval_box(expr, box);
      for (int s = 0; s < 1000; ++s) {
        const Point v = eval_point(expr, testing::clamp_to(box, testing::sample_in(rng, box)));
        ++samples;
        if (std::isfinite(v.real()) && std::isfinite(v.imag()) && !img.contains(v)) ++escapes;
      }
    }
  }
  verdict(6, escapes == 0, fmt("escapes=%zu of %zu samples time=%.1fs", escapes, samples, seconds_since(t0)));

  // ---- 7: monotone refinement over depths 6, 7, 8 (and the depth 9 run).
  const auto sys = sc.system();
  std::vector<std::pair<int, double>> hs;
  for (int d : {6, 7, 8}) {
    const Grid g(sc.bounds, d, sc.membership);
    hs.emplace_back(d, hausdorff(approx_CR(g, sys, sc.chain_schedule()), ref));
  }
  hs.emplace_back(sc.depth, h9);
  bool ok7 = true;
  std::string d7;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    d7 += fmt(" depth%d=%.4f", hs[i].first, hs[i].second);
    if (i == 0) continue;
    const double slack = Grid(sc.bounds, hs[i].first, sc.membership).cell_diameter();
    ok7 = ok7 && hs[i].second <= hs[i - 1].second + slack;
  }
  verdict(7, ok7, "slack=one cell diameter of the finer grid" + d7);

  // ---- 8: determinism of CSV and JSON artifacts.
  const AnalysisReport run2 = run_duality(sc, {out / "run2", 0, false, false});
  bool ok8 = true;
  std::size_t compared = 0;
  std::string d8;
  for (const auto& f : run1.artifacts) {
    const auto ext = fs::path(f).extension();
    if (ext != ".csv" && ext != ".json") continue;
    ++compared;
    if (slurp(out / "run1" / f) != slurp(out / "run2" / f)) {
      ok8 = false;
      d8 += " differs:" + f;
    }
  }
  verdict(8, ok8 && compared >= 6, fmt("compared %zu CSV/JSON artifacts byte for byte, total run time %.1fs",
                                       compared, t_run) + d8);

  return failures == 0 ? 0 : 1;
}
