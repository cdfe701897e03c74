#pragma once

// Grid experiments over the adaptive pricer's knobs.
//
// Spec file:
// {"instance": "file.json"} or {"generator": {"type": "mpcvrp", "n": 8, "t": 2, "k": 2, "delta": 0.5}},
//  "pricer": "adaptive" | "enumerative" | "both",
//  "grid": {"widths": [100, 250, 500], "reuse": [false, true], "midway": [false, true], "merge": [false, true]},
//  "repetitions": 1, "seed": 1, "output": "results"}
// Writes <output>.csv and <output>.json (per-cell reports with traces).

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestcg/driver.hpp"
#include "nestcg/io.hpp"
#include "nestcg/mpcvrp.hpp"
#include "nestcg/synth.hpp"

namespace nestcg {

/// Builds a nested problem from any supported instance document.
inline NestedInstance load_instance(const nlohmann::json& j) {
  const auto type = j.value("type", std::string("nested"));
  if (type == "mpcvrp") {
    auto m = mpcvrp::build_nested(mpcvrp::instance_from_json(j));
    return NestedInstance{std::move(m.problem), m.master};
  }
  if (type == "span") {
    auto b = synth::build_span_problem(synth::span_from_json(j));
    return NestedInstance{std::move(b.problem), b.master};
  }
  if (type == "nested") return nested_from_json(j);
  throw InvalidInput("unknown instance type " + type);
}

/// Instance document produced by a generator description.
inline nlohmann::json generate_document(const nlohmann::json& g, std::uint64_t seed) {
  const auto type = g.at("type").get<std::string>();
  if (type == "mpcvrp") {
    mpcvrp::GeneratorParams p;
    p.customers_per_day = g.value("n", p.customers_per_day);
    p.days = g.value("t", p.days);
    p.vehicles = g.value("k", p.vehicles);
    p.delta = g.value("delta", p.delta);
    p.capacity = g.value("capacity", p.capacity);
    p.seed = g.value("seed", seed);
    const auto src = g.contains("coordinates") ? mpcvrp::read_cvrp_coordinates(g.at("coordinates").get<std::string>())
                                               : mpcvrp::random_coordinates(p.customers_per_day * p.days, p.seed);
    return mpcvrp::to_json(mpcvrp::generate_instance(src, p));
  }
  if (type == "span") {
    synth::SpanParams p;
    p.scenarios = g.value("scenarios", p.scenarios);
    p.min_tasks = g.value("min_tasks", p.min_tasks);
    p.max_tasks = g.value("max_tasks", p.max_tasks);
    p.seed = g.value("seed", seed);
    return synth::to_json(synth::random_span_instance(p));
  }
  throw InvalidInput("unknown generator " + type);
}

struct GridCell {
  PricerKind pricer = PricerKind::adaptive;
  Value width = 250;
  bool reuse = false;
  bool midway = false;
  bool merge = false;
};

struct ExperimentSpec {
  nlohmann::json source;  // {"instance": path} or {"generator": {...}}
  std::string pricer = "adaptive";
  std::vector<Value> widths{100, 250, 500};
  std::vector<bool> reuse{false, true};
  std::vector<bool> midway{false, true};
  std::vector<bool> merge{false, true};
  std::size_t repetitions = 1;
  std::uint64_t seed = 1;
  std::string output = "experiment";

  std::vector<GridCell> cells() const {
    std::vector<GridCell> out;
    const bool adaptive = pricer == "adaptive" || pricer == "both";
    const bool enumerative = pricer == "enumerative" || pricer == "both";
    for (bool r : reuse)
      for (bool m : midway)
        for (bool g : merge)
          for (Value w : widths) {
            if (adaptive) out.push_back(GridCell{PricerKind::adaptive, w, r, m, g});
            if (enumerative) out.push_back(GridCell{PricerKind::enumerative, w, r, m, g});
          }
    return out;
  }

  void validate() const {
    if (pricer != "adaptive" && pricer != "enumerative" && pricer != "both")
      throw InvalidInput("pricer must be adaptive, enumerative or both");
    if (widths.empty() || reuse.empty() || midway.empty() || merge.empty()) throw InvalidInput("grid is empty");
    for (Value w : widths)
      if (w <= 0) throw InvalidInput("bucket widths must be positive");
    if (repetitions == 0) throw InvalidInput("repetitions must be positive");
    if (!source.contains("instance") && !source.contains("generator"))
      throw InvalidInput("spec needs an instance file or a generator");
  }
};

inline ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  try {
    ExperimentSpec s;
    if (j.contains("instance")) s.source["instance"] = j.at("instance");
    if (j.contains("generator")) s.source["generator"] = j.at("generator");
    s.pricer = j.value("pricer", s.pricer);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      s.widths = g.value("widths", s.widths);
      s.reuse = g.value("reuse", s.reuse);
      s.midway = g.value("midway", s.midway);
      s.merge = g.value("merge", s.merge);
    }
    s.repetitions = j.value("repetitions", s.repetitions);
    s.seed = j.value("seed", s.seed);
    s.output = j.value("output", s.output);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed experiment spec: ") + e.what());
  }
}

inline SolverConfig cell_config(const GridCell& c, SolverConfig base = {}) {
  base.pricer = c.pricer;
  base.adaptive.widths = {c.width};
  base.adaptive.reuse = c.reuse;
  base.adaptive.strategy = c.midway ? RefineStrategy::midpoint : RefineStrategy::representative;
  base.adaptive.merge = c.merge;
  return base;
}

struct CellResult {
  GridCell cell;
  std::size_t repetition = 0;
  std::optional<RunReport> report;
  std::string error;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  std::string csv;
  nlohmann::json json;
  bool all_ok() const {
    for (const auto& c : cells)
      if (!c.report) return false;
    return true;
  }
};

inline std::string experiment_csv_header() { return "repetition," + csv_header(); }

/// Runs every cell; a failing cell is recorded and the grid continues.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, const nlohmann::json& instance_doc,
                                       SolverConfig base = {}) {
  const auto inst = load_instance(instance_doc);
  base.keep_trace = true;
  ExperimentResult res;
  std::ostringstream csv;
  csv << experiment_csv_header() << '\n';
  res.json = {{"instance", instance_doc}, {"cells", nlohmann::json::array()}};
  for (std::size_t rep = 0; rep < spec.repetitions; ++rep)
    for (const auto& cell : spec.cells()) {
      CellResult cr{cell, rep, std::nullopt, {}};
      const auto cfg = cell_config(cell, base);
      nlohmann::json jc{{"repetition", rep},
                        {"pricer", to_string(cell.pricer)},
                        {"width", cell.width},
                        {"reuse", cell.reuse},
                        {"midway", cell.midway},
                        {"merge", cell.merge}};
      try {
        cr.report = solve_root(inst.problem, inst.master, cfg);
        csv << rep << ',' << csv_row(cfg, *cr.report) << '\n';
        jc["report"] = to_json(*cr.report);
      } catch (const std::exception& e) {
        cr.error = e.what();
        jc["error"] = cr.error;
      }
      res.json["cells"].push_back(std::move(jc));
      res.cells.push_back(std::move(cr));
    }
  res.csv = csv.str();
  return res;
}

inline nlohmann::json experiment_instance(const ExperimentSpec& spec) {
  if (spec.source.contains("instance")) return read_json_file(spec.source.at("instance").get<std::string>());
  return generate_document(spec.source.at("generator"), spec.seed);
}

/// Runs the spec and writes <output>.csv and <output>.json. Returns 0 on full
/// success, 2 when any cell failed.
inline int run_experiment_files(const ExperimentSpec& spec) {
  const auto res = run_experiment(spec, experiment_instance(spec));
  std::ofstream csv(spec.output + ".csv");
  std::ofstream js(spec.output + ".json");
  if (!csv || !js) throw InvalidInput("cannot write output " + spec.output);
  csv << res.csv;
  js << res.json.dump(1) << '\n';
  return res.all_ok() ? 0 : 2;
}

}  // namespace nestcg
