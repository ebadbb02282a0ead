// Command line runner: chainrec_cli {cr|attractors|duality|oracle|parse-check}.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chainrec/errors.h"
#include "chainrec/parallel.h"
#include "chainrec/scenario.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitInvariant = 4;

std::filesystem::path resolve_out(const chainrec::Scenario& sc, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!sc.output_dir.empty()) {
    std::filesystem::path p = sc.output_dir;
    return p.is_relative() ? sc.base_dir / p : p;
  }
  return "out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chain recurrence, attractors and duality on grid discretizations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(chainrec::kToolVersion));

  std::string scenario_path;
  std::string out_dir;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  bool export_graph = false;
  bool timings = false;

  auto add_scenario_flags = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sub->add_option("--out", out_dir, "Artifact directory (overrides output_dir)");
    sub->add_option("--threads", threads, "Worker threads, 0 = hardware count");
    sub->add_option("--seed", seed, "Seed for sampled checks");
    sub->add_flag("--timings", timings, "Also write timings.json");
  };

  auto* cr = app.add_subcommand("cr", "Chain recurrent set and components");
  add_scenario_flags(cr);
  cr->add_flag("--export-graph", export_graph, "Write the final step graph as step_graph.csv");
  auto* att = app.add_subcommand("attractors", "Trapping certificates, attractors and basins");
  add_scenario_flags(att);
  auto* dual = app.add_subcommand("duality", "cr + attractors + comparison");
  add_scenario_flags(dual);
  dual->add_flag("--export-graph", export_graph, "Write the final step graph as step_graph.csv");
  auto* pc = app.add_subcommand("parse-check", "Validate a scenario and print its config hash");
  pc->add_option("--scenario", scenario_path, "Scenario JSON file")->required();

  auto* oracle = app.add_subcommand("oracle", "Finite-system property sweep");
  std::size_t seed_count = 200;
  std::size_t n_max = 6;
  bool abelian_only = false;
  oracle->add_option("--seeds", seed_count, "Number of random systems")->check(CLI::PositiveNumber);
  oracle->add_option("--n-max", n_max, "Largest state count")->check(CLI::Range(2, 8));
  oracle->add_flag("--abelian-only", abelian_only, "Draw commuting generators only");
  oracle->add_option("--seed", seed, "First seed");
  oracle->add_option("--out", out_dir, "Artifact directory");
  oracle->add_option("--threads", threads, "Worker threads, 0 = hardware count");

  CLI11_PARSE(app, argc, argv);

  try {
    chainrec::set_thread_count(threads);
    if (oracle->parsed()) {
      const auto summary = chainrec::run_oracle_sweep(seed_count, n_max, abelian_only, seed,
                                                      out_dir.empty() ? "out" : out_dir);
      std::cout << summary.dump(2) << "\n";
      if (summary["skipped"].get<std::size_t>() > 0) return kExitBudget;
      return summary["failed"].get<std::size_t>() > 0 ? 1 : 0;
    }

    const chainrec::Scenario sc = chainrec::load_scenario(scenario_path);
    if (pc->parsed()) {
      std::cout << "ok " << chainrec::config_hash(sc.source) << "\n";
      return 0;
    }
    chainrec::RunOptions opt{resolve_out(sc, out_dir), seed, export_graph, timings};
    if (cr->parsed()) {
      const auto rep = chainrec::run_cr(sc, opt);
      std::cout << "cr: " << rep.chain->cr.size() << " cells, " << rep.chain->components.count
                << " components -> " << opt.out_dir.string() << "\n";
    } else if (att->parsed()) {
      const auto rep = chainrec::run_attractors(sc, opt);
      std::cout << "attractors: " << rep.attractors->attractors.size() << " of "
                << rep.attractors->outcomes.size() << " candidates certified -> "
                << opt.out_dir.string() << "\n";
    } else if (dual->parsed()) {
      const auto rep = chainrec::run_duality(sc, opt);
      std::cout << "duality: " << (rep.duality->pass ? "PASS" : "FAIL") << " (max "
                << rep.duality->max_boundary_distance_cells << " cells from the boundary layers) -> "
                << opt.out_dir.string() << "\n";
    }
    return 0;
  } catch (const chainrec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const chainrec::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const chainrec::InvariantError& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
}
