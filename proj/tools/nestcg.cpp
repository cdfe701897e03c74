#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nestcg/nestcg.hpp"

namespace {

void write_doc(const nlohmann::json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(1) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw nestcg::InvalidInput("cannot write " + out);
  f << doc.dump(1) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nestcg: column generation over nested path problems with adaptive bucket pricing"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "solve the root LP of an instance, optionally dive for an integer solution");
  std::string instance, pricer = "adaptive", trace_out, mps_out;
  nestcg::Value width = 250;
  bool reuse = false, midway = false, merge = false, do_dive = false, smooth_auto = false;
  double alpha = 0.5;
  std::size_t max_iter = 50'000, dive_rounds = 100;
  solve->add_option("--instance", instance, "instance JSON (type mpcvrp, span or nested)")->required();
  solve->add_option("--pricer", pricer, "adaptive or enumerative")->check(CLI::IsMember({"adaptive", "enumerative"}));
  solve->add_option("--width", width, "initial bucket width")->check(CLI::PositiveNumber);
  solve->add_flag("--reuse", reuse, "reuse representatives across iterations");
  solve->add_flag("--midway", midway, "midpoint refinement instead of representative splits");
  solve->add_flag("--merge", merge, "merge buckets after refinement");
  solve->add_flag("--dive", do_dive, "run the diving heuristic after the root");
  solve->add_option("--alpha", alpha, "dual smoothing weight")->check(CLI::Range(0.0, 1.0));
  solve->add_flag("--auto-alpha", smooth_auto, "adjust the smoothing weight automatically");
  solve->add_option("--max-iterations", max_iter, "column generation iteration cap");
  solve->add_option("--dive-rounds", dive_rounds, "maximum dive rounds");
  solve->add_option("--trace", trace_out, "write the pricing trace as JSON");
  solve->add_option("--mps", mps_out, "write the final restricted master as MPS");

  auto* gen = app.add_subcommand("generate", "generate an instance");
  gen->require_subcommand(1);
  auto* gen_vrp = gen->add_subcommand("mpcvrp", "balanced multi-period vehicle routing instance");
  nestcg::mpcvrp::GeneratorParams vp;
  std::string coords, out;
  std::uint64_t seed = 1;
  gen_vrp->add_option("--n", vp.customers_per_day, "customers per day")->check(CLI::Range(1, 14));
  gen_vrp->add_option("--t", vp.days, "days")->check(CLI::PositiveNumber);
  gen_vrp->add_option("--k", vp.vehicles, "vehicles")->check(CLI::PositiveNumber);
  gen_vrp->add_option("--delta", vp.delta, "distance cap position between the bounds")->check(CLI::Range(0.0, 1.0));
  gen_vrp->add_option("--capacity", vp.capacity, "vehicle capacity (0 derives it from demands)");
  gen_vrp->add_option("--coords", coords, "CVRP-format coordinate file to sample from");
  gen_vrp->add_option("--seed", seed, "random seed");
  gen_vrp->add_option("--out", out, "output file (stdout if omitted)");

  auto* gen_span = gen->add_subcommand("span", "scenario duty instance with a span cap");
  nestcg::synth::SpanParams sp;
  gen_span->add_option("--scenarios", sp.scenarios, "number of scenarios")->check(CLI::PositiveNumber);
  gen_span->add_option("--min-tasks", sp.min_tasks, "minimum tasks per scenario")->check(CLI::PositiveNumber);
  gen_span->add_option("--max-tasks", sp.max_tasks, "maximum tasks per scenario")->check(CLI::Range(1, 31));
  gen_span->add_option("--seed", seed, "random seed");
  gen_span->add_option("--out", out, "output file (stdout if omitted)");

  auto* exp = app.add_subcommand("experiment", "run a configuration grid");
  std::string spec_path;
  exp->add_option("--spec", spec_path, "experiment spec JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      auto inst = nestcg::load_instance(nestcg::read_json_file(instance));
      nestcg::SolverConfig cfg;
      cfg.pricer = pricer == "adaptive" ? nestcg::PricerKind::adaptive : nestcg::PricerKind::enumerative;
      cfg.adaptive.widths = {width};
      cfg.adaptive.reuse = reuse;
      cfg.adaptive.strategy = midway ? nestcg::RefineStrategy::midpoint : nestcg::RefineStrategy::representative;
      cfg.adaptive.merge = merge;
      cfg.smoothing_alpha = alpha;
      cfg.smoothing_auto = smooth_auto;
      cfg.max_iterations = max_iter;
      cfg.keep_trace = !trace_out.empty();
      nlohmann::json result;
      nestcg::RunReport root;
      if (do_dive) {
        auto d = nestcg::dive(inst.problem, inst.master, cfg, dive_rounds);
        root = d.root;
        result = nestcg::to_json(d);
      } else {
        nestcg::ColumnGeneration cg(inst.problem, inst.master, cfg);
        root = cg.run();
        result = nestcg::to_json(root);
        if (!mps_out.empty()) {
          std::ofstream f(mps_out);
          if (!f) throw nestcg::InvalidInput("cannot write " + mps_out);
          cg.rmp().write_mps(f);
        }
      }
      if (!trace_out.empty()) write_doc(nlohmann::json(root.trace), trace_out);
      std::cout << result.dump(1) << '\n';
      return 0;
    }
    if (gen_vrp->parsed()) {
      vp.seed = seed;
      const auto src = coords.empty() ? nestcg::mpcvrp::random_coordinates(vp.customers_per_day * vp.days, seed)
                                      : nestcg::mpcvrp::read_cvrp_coordinates(coords);
      write_doc(nestcg::mpcvrp::to_json(nestcg::mpcvrp::generate_instance(src, vp)), out);
      return 0;
    }
    if (gen_span->parsed()) {
      sp.seed = seed;
      write_doc(nestcg::synth::to_json(nestcg::synth::random_span_instance(sp)), out);
      return 0;
    }
    if (exp->parsed()) {
      const auto spec = nestcg::experiment_from_json(nestcg::read_json_file(spec_path));
      const int code = nestcg::run_experiment_files(spec);
      std::cout << "wrote " << spec.output << ".csv and " << spec.output << ".json\n";
      return code;
    }
  } catch (const nestcg::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
