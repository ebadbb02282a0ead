#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainrec/attractor.h"
#include "chainrec/chain.h"
#include "chainrec/grid.h"
#include "chainrec/words.h"

namespace chainrec {

inline constexpr const char* kToolName = "chainrec";
inline constexpr const char* kToolVersion = "0.1.0";

// One trapping-region candidate from the scenario file.
struct CandidateSpec {
  enum class Kind { kDisc, kAnnulus, kWhole, kCells };
  Kind kind = Kind::kWhole;
  std::string label;
  double radius = 0.0;  // disc: |z| < radius
  double inner = 0.0;   // annulus: inner < |z| < outer
  double outer = 0.0;
  std::string cells_csv;  // cells: path relative to the scenario file
};

struct Scenario {
  IntervalBox2 bounds;
  Membership membership;
  std::vector<std::string> generator_sources;
  bool abelian_claimed = false;
  int depth = 0;
  std::vector<double> eps_schedule;
  std::vector<Word> g_schedule;
  int L = 0;
  std::uint32_t alpha0 = 0;
  int m_max = 50;
  int omega_depth = 4;
  int h_search_length = 2;
  std::optional<Word> h;
  std::vector<CandidateSpec> candidates;
  bool component_candidates = false;
  int abelian_samples = 1000;
  std::string output_dir;
  std::filesystem::path base_dir;  // directory of the scenario file

  nlohmann::json source;  // the parsed document, echoed in reports

  Grid grid() const;
  GeneratorSystem system() const;
  ChainSchedule chain_schedule() const;
};

// Throws ConfigError naming the offending field.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

// Compact serialization with sorted keys and no whitespace.
std::string canonical_json(const nlohmann::json& doc);
// FNV-1a 64 of canonical_json, as 16 lowercase hex digits.
std::string config_hash(const nlohmann::json& doc);

struct RunOptions {
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  bool export_graph = false;
  bool timings = false;  // also write timings.json (not byte-stable)
};

struct CandidateOutcome {
  std::string label;
  BoxSet U;
  TrappingResult trapping;
  std::optional<AttractorRecord> attractor;
  // Attractors for other (h, alpha0) choices and whether each matches.
  struct Variant {
    Word h;
    std::uint32_t alpha0 = 0;
    std::size_t size = 0;
    bool matches = false;
  };
  std::vector<Variant> variants;
  bool variant_disagreement = false;
};

struct AttractorStage {
  std::vector<CandidateOutcome> outcomes;
  std::vector<AttractorRecord> attractors;  // certified outcomes, scenario alpha0
};

struct AnalysisReport {
  nlohmann::json json;
  std::optional<ChainAnalysis> chain;
  std::optional<AttractorStage> attractors;
  std::optional<DualityReport> duality;
  std::vector<std::string> artifacts;
  std::vector<std::pair<std::string, double>> timings;
};

// Each stage writes its artifacts as {stage}.{csv|json|pgm} under out_dir.
AnalysisReport run_cr(const Scenario& sc, const RunOptions& opt);
AnalysisReport run_attractors(const Scenario& sc, const RunOptions& opt,
                              const ChainAnalysis* chain = nullptr);
AnalysisReport run_duality(const Scenario& sc, const RunOptions& opt);

// Writes oracle.jsonl (one record per seed) and oracle.json (summary).
// Returns the summary; `skipped` counts seeds whose closure hit the budget.
nlohmann::json run_oracle_sweep(std::size_t seed_count, std::size_t n_max, bool abelian_only,
                                std::uint64_t base_seed, const std::filesystem::path& out_dir);

// Evidence for the abelian hypothesis: claim plus sampled commutation check.
nlohmann::json abelian_evidence(const Scenario& sc, std::uint64_t seed);

}  // namespace chainrec
