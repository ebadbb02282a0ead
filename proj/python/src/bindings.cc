#include <complex>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chainrec/errors.h"
#include "chainrec/finite_oracle.h"
#include "chainrec/map_expr.h"
#include "chainrec/scenario.h"

namespace py = pybind11;
using namespace chainrec;

namespace {

using Box = std::tuple<double, double, double, double>;  // re_lo, re_hi, im_lo, im_hi

Box to_tuple(const IntervalBox2& b) { return {b.re.lo, b.re.hi, b.im.lo, b.im.hi}; }

// JSON crosses the boundary as text; the Python side decodes it.
std::string run_stage(const std::string& stage, const Scenario& sc, const std::string& out_dir,
                      std::uint64_t seed, bool export_graph) {
  const RunOptions opt{out_dir, seed, export_graph, false};
  AnalysisReport rep;
  if (stage == "cr") {
    rep = run_cr(sc, opt);
  } else if (stage == "attractors") {
    rep = run_attractors(sc, opt);
  } else if (stage == "duality") {
    rep = run_duality(sc, opt);
  } else {
    throw ConfigError("unknown stage '" + stage + "'");
  }
  return rep.json.dump();
}

finite::FiniteSystem finite_from(std::size_t n, const std::vector<std::vector<double>>& dist,
                                 const std::vector<std::vector<std::uint8_t>>& gens) {
  finite::FiniteSystem sys{n, dist, gens};
  sys.validate();
  return sys;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = kToolVersion;

  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", config_error.ptr());
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_AssertionError);

  m.def("normalize_map", [](const std::string& src) { return to_string(parse_map_expr(src)); },
        py::arg("source"));
  m.def("eval_point",
        [](const std::string& src, std::complex<double> z) { return eval_point(parse_map_expr(src), z); },
        py::arg("source"), py::arg("z"));
  m.def(
      "eval_box",
      [](const std::string& src, Box b) {
        const auto [rl, rh, il, ih] = b;
        if (!(rl <= rh) || !(il <= ih)) throw ConfigError("box bounds must satisfy lo <= hi");
        return to_tuple(eval_box(parse_map_expr(src), IntervalBox2{{rl, rh}, {il, ih}}));
      },
      py::arg("source"), py::arg("box"));

  m.def("config_hash", [](const std::string& doc) { return config_hash(nlohmann::json::parse(doc)); },
        py::arg("scenario_json"));

  m.def(
      "run_scenario_file",
      [](const std::string& stage, const std::string& path, const std::string& out_dir, std::uint64_t seed,
         bool export_graph) {
        py::gil_scoped_release nogil;
        return run_stage(stage, load_scenario(path), out_dir, seed, export_graph);
      },
      py::arg("stage"), py::arg("path"), py::arg("out_dir"), py::arg("seed") = 0, py::arg("export_graph") = false);
  m.def(
      "run_scenario_json",
      [](const std::string& stage, const std::string& doc, const std::string& out_dir, std::uint64_t seed,
         bool export_graph) {
        nlohmann::json parsed;
        try {
          parsed = nlohmann::json::parse(doc);
        } catch (const nlohmann::json::parse_error& e) {
          throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
        }
        py::gil_scoped_release nogil;
        return run_stage(stage, parse_scenario(parsed, std::filesystem::current_path()), out_dir, seed,
                         export_graph);
      },
      py::arg("stage"), py::arg("scenario_json"), py::arg("out_dir"), py::arg("seed") = 0,
      py::arg("export_graph") = false);

  m.def(
      "oracle_sweep",
      [](std::size_t seeds, std::size_t n_max, bool abelian_only, std::uint64_t base_seed,
         const std::string& out_dir) {
        py::gil_scoped_release nogil;
        return run_oracle_sweep(seeds, n_max, abelian_only, base_seed, out_dir).dump();
      },
      py::arg("seeds"), py::arg("n_max") = 6, py::arg("abelian_only") = true, py::arg("base_seed") = 0,
      py::arg("out_dir") = "out/oracle");
  m.def(
      "oracle_seed_report",
      [](std::uint64_t seed, std::size_t n_max, bool abelian_only) {
        return finite::oracle_seed_report(seed, n_max, abelian_only).dump();
      },
      py::arg("seed"), py::arg("n_max") = 6, py::arg("abelian_only") = true);

  m.def(
      "exact_chain_components",
      [](std::size_t n, const std::vector<std::vector<double>>& dist,
         const std::vector<std::vector<std::uint8_t>>& gens) {
        const finite::ChainOracle oracle(finite_from(n, dist, gens));
        std::vector<std::vector<std::uint32_t>> out;
        for (finite::StateSet c : oracle.components()) out.push_back(finite::members(c));
        return out;
      },
      py::arg("n"), py::arg("dist"), py::arg("generators"));
}
