// Root LP of a small multi-period routing instance with both pricers, then a dive.

#include <cstdio>

#include "nestcg/nestcg.hpp"

int main() {
  using namespace nestcg;
  mpcvrp::GeneratorParams g;
  g.customers_per_day = 6;
  g.days = 3;
  g.vehicles = 3;
  g.delta = 0.5;
  g.seed = 7;
  const auto inst = mpcvrp::generate_instance(mpcvrp::random_coordinates(g.customers_per_day * g.days, g.seed), g);
  const auto model = mpcvrp::build_nested(inst);
  std::printf("%zu days, %zu customers, K = %lld, D = %lld (D_min %.1f, D_max %.1f)\n", inst.days,
              inst.customers.size(), static_cast<long long>(inst.vehicles),
              static_cast<long long>(inst.distance_cap), inst.d_min, inst.d_max);

  SolverConfig cfg;
  cfg.adaptive.widths = {100};
  cfg.adaptive.reuse = true;
  cfg.adaptive.merge = true;
  const auto adaptive = solve_root(model.problem, model.master, cfg);
  cfg.pricer = PricerKind::enumerative;
  const auto enumerative = solve_root(model.problem, model.master, cfg);
  std::printf("adaptive    lp %.4f  iterations %zu  refinements %zu  merges %zu\n", adaptive.lp_value,
              adaptive.iterations, adaptive.refinements, adaptive.merges);
  std::printf("enumerative lp %.4f  iterations %zu\n", enumerative.lp_value, enumerative.iterations);

  cfg.pricer = PricerKind::adaptive;
  const auto d = dive(model.problem, model.master, cfg);
  if (d.success)
    std::printf("dive: upper bound %.1f, gap %.2f%%, %zu schedules\n", d.upper_bound, 100.0 * d.gap, d.solution.size());
  else
    std::printf("dive failed: %s\n", d.failure.c_str());
  return 0;
}
