#include "chainrec/scenario.h"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chainrec/boxset_io.h"
#include "chainrec/errors.h"
#include "chainrec/finite_oracle.h"
#include "chainrec/parallel.h"

namespace chainrec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("scenario field '" + field + "': " + what);
}

const json& require(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end()) field_error(field, "missing");
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) field_error(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) field_error(field, "must be finite");
  return x;
}

std::int64_t integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) field_error(field, "expected an integer");
  return v.get<std::int64_t>();
}

int int_field(const json& doc, const char* field, int fallback, std::int64_t lo, std::int64_t hi) {
  auto it = doc.find(field);
  if (it == doc.end()) return fallback;
  const auto x = integer(*it, field);
  if (x < lo || x > hi) {
    field_error(field, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(x);
}

Word word_from_json(const json& v, std::size_t k, const std::string& field) {
  try {
    if (v.is_string()) return parse_word(v.get<std::string>(), k);
    if (v.is_array()) {
      std::vector<std::uint32_t> idx;
      for (const auto& e : v) {
        const auto i = integer(e, field);
        if (i < 0 || static_cast<std::size_t>(i) >= k) field_error(field, "generator index out of range");
        idx.push_back(static_cast<std::uint32_t>(i));
      }
      return Word(std::move(idx), k);
    }
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind("scenario field", 0) == 0) throw;
    field_error(field, msg);
  } catch (const std::invalid_argument& e) {
    field_error(field, e.what());
  }
  field_error(field, "expected a word as \"[i,j,...]\" or an index array");
}

Membership parse_membership(const json& doc) {
  auto it = doc.find("membership");
  if (it == doc.end()) return Membership::rect();
  const json& m = *it;
  std::string kind;
  Point center{0.0, 0.0};
  double radius = 1.0;
  if (m.is_string()) {
    kind = m.get<std::string>();
  } else if (m.is_object()) {
    if (!m.contains("kind") || !m["kind"].is_string()) field_error("membership.kind", "missing");
    kind = m["kind"].get<std::string>();
    if (m.contains("center")) {
      const json& c = m["center"];
      if (!c.is_array() || c.size() != 2) field_error("membership.center", "expected [x, y]");
      center = {number(c[0], "membership.center"), number(c[1], "membership.center")};
    }
    if (m.contains("radius")) {
      radius = number(m["radius"], "membership.radius");
      if (radius <= 0.0) field_error("membership.radius", "must be positive");
    }
  } else {
    field_error("membership", "expected \"disc\", \"rect\" or an object");
  }
  if (kind == "rect") return Membership::rect();
  if (kind == "disc") return Membership::disc(center, radius);
  field_error("membership", "unknown kind '" + kind + "'");
}

CandidateSpec parse_candidate(const json& c, std::size_t i) {
  const std::string field = "trapping_candidates[" + std::to_string(i) + "]";
  if (!c.is_object() || !c.contains("kind") || !c["kind"].is_string()) {
    field_error(field, "expected an object with a string 'kind'");
  }
  CandidateSpec s;
  const std::string kind = c["kind"].get<std::string>();
  char buf[64];
  if (kind == "disc") {
    s.kind = CandidateSpec::Kind::kDisc;
    s.radius = number(require(c, "radius"), field + ".radius");
    if (s.radius <= 0.0) field_error(field + ".radius", "must be positive");
    std::snprintf(buf, sizeof buf, "disc r=%g", s.radius);
    s.label = buf;
  } else if (kind == "annulus") {
    s.kind = CandidateSpec::Kind::kAnnulus;
    s.inner = number(require(c, "inner"), field + ".inner");
    s.outer = number(require(c, "outer"), field + ".outer");
    if (s.inner < 0.0 || s.outer <= s.inner) field_error(field, "need 0 <= inner < outer");
    std::snprintf(buf, sizeof buf, "annulus %g<r<%g", s.inner, s.outer);
    s.label = buf;
  } else if (kind == "whole") {
    s.kind = CandidateSpec::Kind::kWhole;
    s.label = "whole";
  } else if (kind == "cells") {
    s.kind = CandidateSpec::Kind::kCells;
    const json& p = require(c, "path");
    if (!p.is_string()) field_error(field + ".path", "expected a string");
    s.cells_csv = p.get<std::string>();
    s.label = "cells " + s.cells_csv;
  } else {
    field_error(field + ".kind", "unknown kind '" + kind + "'");
  }
  if (c.contains("label")) {
    if (!c["label"].is_string()) field_error(field + ".label", "expected a string");
    s.label = c["label"].get<std::string>();
  }
  return s;
}

BoxSet candidate_cells(const Grid& grid, const CandidateSpec& c, const fs::path& base_dir) {
  switch (c.kind) {
    case CandidateSpec::Kind::kDisc:
      return disc_cells(grid, {0.0, 0.0}, c.radius);
    case CandidateSpec::Kind::kAnnulus: {
      // Cells meeting the open annulus: meet |z| < outer, not inside |z| <= inner.
      const BoxSet outer = disc_cells(grid, {0.0, 0.0}, c.outer);
      std::vector<CellId> ids;
      for (CellId id : outer) {
        const IntervalBox2 b = grid.cell_box(id);
        const double fx = std::max(std::abs(b.re.lo), std::abs(b.re.hi));
        const double fy = std::max(std::abs(b.im.lo), std::abs(b.im.hi));
        if (std::hypot(fx, fy) > c.inner) ids.push_back(id);
      }
      return BoxSet::from_sorted(grid, std::move(ids));
    }
    case CandidateSpec::Kind::kWhole:
      return BoxSet::all(grid);
    case CandidateSpec::Kind::kCells: {
      fs::path p = c.cells_csv;
      if (p.is_relative()) p = base_dir / p;
      try {
        return read_csv(grid, p);
      } catch (const std::exception& e) {
        throw ConfigError("scenario field 'trapping_candidates.path': " + std::string(e.what()));
      }
    }
  }
  throw InvariantError("unknown candidate kind");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

json report_header(const Scenario& sc, const char* stage) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"stage", stage},
          {"config_hash", config_hash(sc.source)},
          {"scenario", sc.source}};
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// Wall-clock numbers stay out of the deterministic artifacts.
void write_timings(const fs::path& dir, const char* stage,
                   const std::vector<std::pair<std::string, double>>& timings) {
  json t = {{"stage", stage}, {"seconds", json::object()}};
  for (const auto& [k, v] : timings) t["seconds"][k] = v;
  write_json(dir / "timings.json", t);
}

json chain_json(const ChainAnalysis& ch) {
  json pairs = json::array();
  for (const auto& p : ch.pairs) {
    pairs.push_back({{"g", to_string(p.g)},
                     {"eps", p.eps},
                     {"vertices", p.vertices},
                     {"recurrent", p.recurrent},
                     {"components", p.components}});
  }
  json sizes = json::array();
  std::vector<std::size_t> counts(ch.components.count, 0);
  for (auto l : ch.components.labels) ++counts[l];
  for (auto c : counts) sizes.push_back(c);
  return {{"cr_cells", ch.cr.size()},
          {"cr_area", ch.cr.area()},
          {"component_count", ch.components.count},
          {"component_sizes", sizes},
          {"pairs", pairs}};
}

}  // namespace

Grid Scenario::grid() const { return Grid(bounds, depth, membership); }

GeneratorSystem Scenario::system() const { return make_system(generator_sources, abelian_claimed); }

ChainSchedule Scenario::chain_schedule() const { return {g_schedule, eps_schedule, L}; }

Scenario parse_scenario(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
  Scenario sc;
  sc.source = doc;
  sc.base_dir = base_dir;

  const json& b = require(doc, "bounds");
  if (!b.is_array() || b.size() != 4) field_error("bounds", "expected [re_lo, re_hi, im_lo, im_hi]");
  sc.bounds = {{number(b[0], "bounds"), number(b[1], "bounds")},
               {number(b[2], "bounds"), number(b[3], "bounds")}};
  if (!(sc.bounds.re.lo < sc.bounds.re.hi) || !(sc.bounds.im.lo < sc.bounds.im.hi)) {
    field_error("bounds", "each interval must have lo < hi");
  }
  sc.membership = parse_membership(doc);

  const json& gens = require(doc, "generators");
  if (!gens.is_array()) field_error("generators", "expected an array of expressions");
  if (gens.empty()) field_error("generators", "empty generator list");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string field = "generators[" + std::to_string(i) + "]";
    if (!gens[i].is_string()) field_error(field, "expected a string");
    try {
      parse_map_expr(gens[i].get<std::string>());
    } catch (const ParseError& e) {
      field_error(field, e.what());
    }
    sc.generator_sources.push_back(gens[i].get<std::string>());
  }
  const std::size_t k = sc.generator_sources.size();
  if (doc.contains("abelian")) {
    if (!doc["abelian"].is_boolean()) field_error("abelian", "expected a boolean");
    sc.abelian_claimed = doc["abelian"].get<bool>();
  }

  sc.depth = int_field(doc, "depth", -1, 0, Grid::kMaxDepth);
  if (sc.depth < 0) field_error("depth", "missing");

  const json& eps = require(doc, "eps_schedule");
  if (!eps.is_array() || eps.empty()) field_error("eps_schedule", "expected a nonempty array");
  for (const auto& e : eps) {
    const double x = number(e, "eps_schedule");
    if (x <= 0.0) field_error("eps_schedule", "entries must be positive");
    if (!sc.eps_schedule.empty() && !(x < sc.eps_schedule.back())) {
      field_error("eps_schedule", "entries must be strictly decreasing");
    }
    sc.eps_schedule.push_back(x);
  }

  sc.L = int_field(doc, "L", 0, 0, 10);

  const json& gs = require(doc, "g_schedule");
  if (gs.is_object()) {
    if (!gs.contains("all_up_to")) field_error("g_schedule", "object form needs 'all_up_to'");
    const auto n = integer(gs["all_up_to"], "g_schedule.all_up_to");
    if (n < 1 || n > 10) field_error("g_schedule.all_up_to", "out of range [1, 10]");
    GeneratorSystem probe;
    probe.generators.resize(k, MapExpr::var());
    try {
      sc.g_schedule = enumerate_nonempty_words(probe, static_cast<int>(n));
    } catch (const BudgetError& e) {
      throw BudgetError("scenario field 'g_schedule': " + std::string(e.what()));
    }
  } else if (gs.is_array()) {
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const std::string field = "g_schedule[" + std::to_string(i) + "]";
      Word w = word_from_json(gs[i], k, field);
      if (w.is_identity()) field_error(field, "the identity is not an element of G");
      sc.g_schedule.push_back(std::move(w));
    }
  } else {
    field_error("g_schedule", "expected an array of words or {\"all_up_to\": n}");
  }
  if (sc.g_schedule.empty()) field_error("g_schedule", "empty schedule");

  sc.alpha0 = static_cast<std::uint32_t>(int_field(doc, "alpha0", 0, 0, static_cast<std::int64_t>(k) - 1));
  sc.m_max = int_field(doc, "m_max", 50, 1, 100000);
  sc.omega_depth = int_field(doc, "omega_depth", 4, 1, 64);
  sc.h_search_length = int_field(doc, "h_search_length", 2, 1, 6);
  sc.abelian_samples = int_field(doc, "abelian_samples", 1000, 0, 10000000);
  if (doc.contains("h")) {
    Word h = word_from_json(doc["h"], k, "h");
    if (h.is_identity()) field_error("h", "h must be a non-identity word");
    sc.h = std::move(h);
  }

  if (doc.contains("trapping_candidates")) {
    const json& c = doc["trapping_candidates"];
    if (!c.is_array()) field_error("trapping_candidates", "expected an array");
    for (std::size_t i = 0; i < c.size(); ++i) sc.candidates.push_back(parse_candidate(c[i], i));
  }
  if (doc.contains("sublevel_radii")) {
    const json& r = doc["sublevel_radii"];
    if (!r.is_array()) field_error("sublevel_radii", "expected an array");
    for (const auto& v : r) {
      CandidateSpec s;
      s.kind = CandidateSpec::Kind::kDisc;
      s.radius = number(v, "sublevel_radii");
      if (s.radius <= 0.0) field_error("sublevel_radii", "radii must be positive");
      char buf[64];
      std::snprintf(buf, sizeof buf, "sublevel r=%g", s.radius);
      s.label = buf;
      sc.candidates.push_back(s);
    }
  }
  if (doc.contains("component_candidates")) {
    if (!doc["component_candidates"].is_boolean()) field_error("component_candidates", "expected a boolean");
    sc.component_candidates = doc["component_candidates"].get<bool>();
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) field_error("output_dir", "expected a string");
    sc.output_dir = doc["output_dir"].get<std::string>();
  }
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_scenario(doc, path.parent_path());
}

std::string canonical_json(const json& doc) {
  // nlohmann's object type is an ordered std::map, so dump() sorts keys.
  return doc.dump();
}

std::string config_hash(const json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_json(doc)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

json abelian_evidence(const Scenario& sc, std::uint64_t seed) {
  const Grid grid = sc.grid();
  const GeneratorSystem sys = sc.system();
  json j = {{"claimed", sc.abelian_claimed}, {"samples", sc.abelian_samples}, {"seed", seed}};
  j["sampled_commute"] =
      sc.abelian_samples > 0 ? json(check_abelian_sampled(sys, grid, sc.abelian_samples, seed)) : json(nullptr);
  return j;
}

AnalysisReport run_cr(const Scenario& sc, const RunOptions& opt) {
  prepare_out(opt.out_dir);
  Stopwatch sw;
  AnalysisReport rep;
  const Grid grid = sc.grid();
  const GeneratorSystem sys = sc.system();
  const ChainSchedule schedule = sc.chain_schedule();
  schedule.validate(sys);

  rep.chain = analyze_chain_recurrence(grid, sys, schedule);
  rep.timings.emplace_back("cr", sw.lap());
  const ChainAnalysis& ch = *rep.chain;

  write_csv(opt.out_dir / "cr.csv", ch.cr);
  write_text(opt.out_dir / "components.csv", components_to_csv(ch.components));
  write_pgm(opt.out_dir / "cr.pgm", ch.cr);
  rep.artifacts = {"cr.csv", "components.csv", "cr.pgm"};
  if (opt.export_graph) {
    // Final (g, eps) pair restricted to the computed CR.
    const StepGraph g = build_step_graph(ch.cr, sys, sc.g_schedule.back(), sc.eps_schedule.back(), sc.L);
    write_text(opt.out_dir / "step_graph.csv", step_graph_to_csv(g));
    rep.artifacts.push_back("step_graph.csv");
  }
  rep.timings.emplace_back("cr_write", sw.lap());

  rep.json = report_header(sc, "cr");
  rep.json["grid"] = grid_to_json(grid);
  rep.json["cr"] = chain_json(ch);
  rep.json["abelian_evidence"] = abelian_evidence(sc, opt.seed);
  rep.artifacts.push_back("cr.json");
  rep.json["artifacts"] = rep.artifacts;
  write_json(opt.out_dir / "cr.json", rep.json);
  if (opt.timings) write_timings(opt.out_dir, "cr", rep.timings);
  return rep;
}

AnalysisReport run_attractors(const Scenario& sc, const RunOptions& opt, const ChainAnalysis* chain) {
  prepare_out(opt.out_dir);
  Stopwatch sw;
  AnalysisReport rep;
  const Grid grid = sc.grid();
  const GeneratorSystem sys = sc.system();

  std::vector<std::pair<std::string, BoxSet>> cands;
  for (const auto& c : sc.candidates) cands.emplace_back(c.label, candidate_cells(grid, c, sc.base_dir));
  if (sc.component_candidates) {
    std::optional<ChainAnalysis> local;
    if (chain == nullptr) {
      local = analyze_chain_recurrence(grid, sys, sc.chain_schedule());
      chain = &*local;
    }
    const auto grown = component_closure_candidates(grid, sys, chain->components);
    for (std::size_t i = 0; i < grown.size(); ++i) {
      cands.emplace_back("component " + std::to_string(i), grown[i]);
    }
  }
  rep.timings.emplace_back("candidates", sw.lap());

  const BasinSolver solver(grid, sys);
  const std::vector<Word> h_words = enumerate_nonempty_words(sys, sc.h_search_length);
  AttractorStage stage;
  json outcomes = json::array();
  std::string cells_csv = "candidate,ix,iy\n";
  BoxSet union_A(grid);

  for (std::size_t ci = 0; ci < cands.size(); ++ci) {
    auto& [label, U] = cands[ci];
    json oj = {{"label", label}, {"U_cells", U.size()}};
    if (U.empty()) {
      oj["certified"] = false;
      oj["reason"] = "empty candidate";
      outcomes.push_back(oj);
      continue;
    }
    CandidateOutcome out{label, U,
                         sc.h ? certify_trapping(grid, sys, U, *sc.h, sc.L)
                              : find_trapping_certificate(grid, sys, U, sc.L, sc.h_search_length),
                         std::nullopt, {}, false};
    oj["certified"] = out.trapping.certificate.has_value();
    oj["image_cells"] = out.trapping.image_set.size();
    if (!out.trapping.certificate) {
      if (out.trapping.violating_cell) {
        const Cell c = grid.cell(*out.trapping.violating_cell);
        oj["violating_cell"] = {c.ix, c.iy};
      }
      outcomes.push_back(oj);
      stage.outcomes.push_back(std::move(out));
      continue;
    }
    const TrappingCertificate& cert = *out.trapping.certificate;
    AttractorRecord rec = compute_attractor(grid, sys, cert, sc.alpha0, sc.m_max);
    rec.basin = solver.basin(rec.A, sc.alpha0, sc.omega_depth, sc.L);

    // Other witnesses h and other designated generators.
    std::size_t extra_h = 0;
    for (const Word& h : h_words) {
      if (h == cert.h || extra_h >= 2) continue;
      const TrappingResult tr = certify_trapping(grid, sys, U, h, sc.L);
      if (!tr.certificate) continue;
      ++extra_h;
      const AttractorRecord v = compute_attractor(grid, sys, *tr.certificate, sc.alpha0, sc.m_max);
      out.variants.push_back({h, sc.alpha0, v.A.size(), v.A == rec.A});
    }
    for (std::uint32_t a = 0; a < sys.size(); ++a) {
      if (a == sc.alpha0) continue;
      const AttractorRecord v = compute_attractor(grid, sys, cert, a, sc.m_max);
      out.variants.push_back({cert.h, a, v.A.size(), v.A == rec.A});
    }
    json vj = json::array();
    for (const auto& v : out.variants) {
      if (!v.matches) out.variant_disagreement = true;
      vj.push_back({{"h", to_string(v.h)}, {"alpha0", v.alpha0}, {"A_cells", v.size}, {"matches", v.matches}});
    }

    oj["h"] = to_string(cert.h);
    oj["A_cells"] = rec.A.size();
    oj["core_cells"] = rec.core.size();
    oj["basin_cells"] = rec.basin.size();
    oj["stabilized"] = rec.stabilized;
    oj["m_used"] = rec.m_used;
    oj["A_subset_U"] = rec.A.subset_of(U);
    oj["U_subset_basin"] = U.subset_of(rec.basin);
    oj["variants"] = vj;
    oj["variant_disagreement"] = out.variant_disagreement;
    oj["record"] = json::parse(attractor_to_json(rec));
    outcomes.push_back(oj);

    for (CellId id : rec.A) {
      const Cell c = grid.cell(id);
      cells_csv += std::to_string(ci) + "," + std::to_string(c.ix) + "," + std::to_string(c.iy) + "\n";
    }
    union_A = union_A.unite(rec.A);
    out.attractor = rec;
    stage.attractors.push_back(std::move(rec));
    stage.outcomes.push_back(std::move(out));
  }
  rep.timings.emplace_back("attractors", sw.lap());

  write_text(opt.out_dir / "attractors.csv", cells_csv);
  write_pgm(opt.out_dir / "attractors.pgm", union_A);
  rep.artifacts = {"attractors.csv", "attractors.pgm", "attractors.json"};
  rep.json = report_header(sc, "attractors");
  rep.json["grid"] = grid_to_json(grid);
  rep.json["alpha0"] = sc.alpha0;
  rep.json["omega_depth"] = sc.omega_depth;
  rep.json["candidates"] = outcomes;
  rep.json["abelian_evidence"] = abelian_evidence(sc, opt.seed);
  rep.json["artifacts"] = rep.artifacts;
  write_json(opt.out_dir / "attractors.json", rep.json);
  if (opt.timings) write_timings(opt.out_dir, "attractors", rep.timings);
  rep.attractors = std::move(stage);
  return rep;
}

AnalysisReport run_duality(const Scenario& sc, const RunOptions& opt) {
  AnalysisReport cr = run_cr(sc, opt);
  AnalysisReport at = run_attractors(sc, opt, &*cr.chain);
  Stopwatch sw;
  const Grid grid = sc.grid();
  const DualityReport d = duality_report(grid, cr.chain->cr, at.attractors->attractors);

  AnalysisReport rep;
  rep.timings = cr.timings;
  rep.timings.insert(rep.timings.end(), at.timings.begin(), at.timings.end());
  rep.timings.emplace_back("duality", sw.lap());

  write_csv(opt.out_dir / "duality.csv", d.symmetric_difference);
  write_pgm(opt.out_dir / "duality.pgm", d.symmetric_difference);
  rep.artifacts = cr.artifacts;
  rep.artifacts.insert(rep.artifacts.end(), at.artifacts.begin(), at.artifacts.end());
  for (const char* f : {"duality.csv", "duality.pgm", "duality.json"}) rep.artifacts.emplace_back(f);

  rep.json = report_header(sc, "duality");
  rep.json["grid"] = grid_to_json(grid);
  rep.json["cr"] = cr.json["cr"];
  rep.json["attractors"] = json::array();
  for (const auto& o : at.json["candidates"]) {
    json s = o;
    s.erase("record");
    rep.json["attractors"].push_back(s);
  }
  rep.json["duality"] = {{"complement_cr_cells", d.complement_cr.size()},
                         {"basin_minus_attractor_cells", d.basin_minus_attractor.size()},
                         {"symmetric_difference_cells", d.symmetric_difference.size()},
                         {"max_boundary_distance_cells", d.max_boundary_distance_cells},
                         {"max_boundary_distance", d.max_boundary_distance},
                         {"tolerance_cells", DualityReport::kToleranceCells},
                         {"attractor_count", d.attractor_count},
                         {"verdict", d.pass ? "PASS" : "FAIL"}};
  rep.json["abelian_evidence"] = cr.json["abelian_evidence"];
  rep.json["artifacts"] = rep.artifacts;
  write_json(opt.out_dir / "duality.json", rep.json);
  if (opt.timings) write_timings(opt.out_dir, "duality", rep.timings);

  rep.chain = std::move(cr.chain);
  rep.attractors = std::move(at.attractors);
  rep.duality = d;
  return rep;
}

json run_oracle_sweep(std::size_t seed_count, std::size_t n_max, bool abelian_only, std::uint64_t base_seed,
                      const fs::path& out_dir) {
  if (seed_count < 1) throw ConfigError("oracle: seed_count must be at least 1");
  if (n_max < 2 || n_max > finite::kMaxStates) throw ConfigError("oracle: n_max must be in [2, 8]");
  prepare_out(out_dir);

  std::vector<json> records(seed_count);
  parallel_for(seed_count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      records[i] = finite::oracle_seed_report(base_seed + i, n_max, abelian_only);
    }
  });

  std::string lines;
  json props = json::object();
  std::size_t passed = 0, failed = 0, skipped = 0, equal = 0;
  for (const auto& r : records) {
    lines += r.dump() + "\n";
    if (r.contains("skipped")) {
      ++skipped;
      continue;
    }
    (r["pass"].get<bool>() ? passed : failed) += 1;
    if (r["duality"]["equal"].get<bool>()) ++equal;
    for (const auto& [key, value] : r["properties"].items()) {
      json& p = props[key];
      if (p.is_null()) p = {{"pass", 0}, {"fail", 0}, {"not_applicable", 0}};
      const char* slot = value.is_null() ? "not_applicable" : value.get<bool>() ? "pass" : "fail";
      p[slot] = p[slot].get<std::size_t>() + 1;
    }
  }
  write_text(out_dir / "oracle.jsonl", lines);

  json summary = {{"tool", kToolName},
                  {"version", kToolVersion},
                  {"seed_count", seed_count},
                  {"base_seed", base_seed},
                  {"n_max", n_max},
                  {"abelian_only", abelian_only},
                  {"passed", passed},
                  {"failed", failed},
                  {"skipped", skipped},
                  {"duality_equal", equal},
                  {"duality_asserted", abelian_only},
                  {"properties", props}};
  write_json(out_dir / "oracle.json", summary);
  return summary;
}

}  // namespace chainrec
