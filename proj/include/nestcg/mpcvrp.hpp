#pragma once

// Balanced multi-period capacitated VRP: K vehicles serve every day's
// customers, each vehicle's total distance over all days is capped by D.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestcg/driver.hpp"
#include "nestcg/labeling.hpp"
#include "nestcg/model.hpp"

namespace nestcg::mpcvrp {

struct Point {
  Value x = 0;
  Value y = 0;
};

struct Customer {
  Point at;
  Value demand = 0;
  std::size_t day = 0;
};

struct Instance {
  std::size_t days = 1;
  std::int64_t vehicles = 1;
  Value capacity = 0;
  Point depot;
  std::vector<Customer> customers;
  Value distance_cap = 0;
  // Provenance of the cap.
  double delta = 1.0;
  double d_min = 0.0;
  double d_max = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (days == 0) throw InvalidInput("instance needs at least one day");
    if (vehicles <= 0) throw InvalidInput("instance needs at least one vehicle");
    if (distance_cap <= 0) throw InvalidInput("distance cap must be positive");
    if (customers.empty()) throw InvalidInput("instance has no customers");
    for (const auto& c : customers) {
      if (c.day >= days) throw InvalidInput("customer assigned to a day out of range");
      if (c.demand > capacity) throw InvalidInput("customer demand exceeds vehicle capacity");
      if (c.demand < 0) throw InvalidInput("negative demand");
    }
  }

  [[nodiscard]] std::vector<std::size_t> customers_of_day(std::size_t t) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < customers.size(); ++i)
      if (customers[i].day == t) out.push_back(i);
    return out;
  }
};

/// Euclidean distance rounded to the nearest integer.
inline Value distance(Point a, Point b) {
  const double dx = static_cast<double>(a.x - b.x), dy = static_cast<double>(a.y - b.y);
  return static_cast<Value>(std::llround(std::sqrt(dx * dx + dy * dy)));
}

inline Value distance_cap(double d_min, double d_max, double delta) {
  if (delta < 0.0 || delta > 1.0) throw InvalidInput("delta must lie in [0, 1]");
  return static_cast<Value>(std::floor(d_min + delta * (d_max - d_min) + 1e-9));
}

struct Model {
  NestedProblem problem;
  MasterSpec master;
  /// Customer index per element; -1 for the idle element of a day.
  std::vector<std::int64_t> customer_of;
  std::vector<ElementId> idle_of_day;
};

/// One block per day holding that day's customers plus an idle element that
/// lets a vehicle stay at the depot; only customers own master rows.
inline Model build_nested(const Instance& inst) {
  inst.validate();
  Model m;
  std::vector<Block> blocks;
  std::vector<ElementId> coverage;
  ElementId next = 0;
  for (std::size_t t = 0; t < inst.days; ++t) {
    Block b;
    SubpathResource load;
    load.name = "load";
    const auto day = inst.customers_of_day(t);
    std::vector<ElementId> ids;
    for (std::size_t ci : day) {
      const ElementId e = next++;
      ids.push_back(e);
      b.elements.push_back(e);
      m.customer_of.push_back(static_cast<std::int64_t>(ci));
      coverage.push_back(e);
      load.windows[e] = Window{0, inst.capacity};
    }
    const ElementId idle = next++;
    b.elements.push_back(idle);
    m.customer_of.push_back(-1);
    m.idle_of_day.push_back(idle);

    for (std::size_t a = 0; a < day.size(); ++a) {
      const auto& ca = inst.customers[day[a]];
      const Value din = distance(inst.depot, ca.at), dout = distance(ca.at, inst.depot);
      b.entries.push_back(EndpointArc{ids[a], din, {ca.demand}, {din}});
      b.exits.push_back(EndpointArc{ids[a], dout, {0}, {dout}});
      for (std::size_t c = 0; c < day.size(); ++c) {
        if (a == c) continue;
        const auto& cc = inst.customers[day[c]];
        const Value d = distance(ca.at, cc.at);
        b.arcs.push_back(Arc{ids[a], ids[c], d, {cc.demand}, {d}});
      }
    }
    b.entries.push_back(EndpointArc{idle, 0, {0}, {0}});
    b.exits.push_back(EndpointArc{idle, 0, {0}, {0}});
    b.resources.push_back(std::move(load));
    blocks.push_back(std::move(b));
  }
  PathResource dist;
  dist.name = "distance";
  dist.dim = 1;
  dist.aggregator = Aggregator::sum;
  dist.coeff = {1};
  dist.bound = inst.distance_cap;
  m.problem = NestedProblem(std::move(blocks), {dist}, coverage);
  m.master = MasterSpec{Sense::partition, inst.vehicles};
  return m;
}

/// Minimum reduced cost routes of one day with distance in [lo, hi]. The
/// per-path dual is charged on day 0, where every path starts.
inline std::vector<RcsppResult> daily_route_pricer(const Model& model, std::size_t day, const Duals& duals, Value lo,
                                                   Value hi, std::size_t top_k = 1) {
  RcsppQuery q;
  q.block = day;
  q.lo = {lo};
  q.hi = {hi};
  q.top_k = top_k;
  auto out = elementary_rcspp(model.problem, duals, q);
  if (day == 0)
    for (auto& r : out) r.rcost -= duals.per_path;
  return out;
}

// ---------------------------------------------------------------------------
// Exact daily CVRP for the cap bounds (desk scale only).

inline constexpr std::size_t kMaxExactDayCustomers = 14;

struct DaySolution {
  Value cost = 0;
  std::vector<Value> route_costs;
};

/// Minimum total distance serving all given customers with at most K routes.
inline DaySolution solve_day_exact(const Instance& inst, const std::vector<std::size_t>& day) {
  const auto n = day.size();
  if (n > kMaxExactDayCustomers)
    throw CapacityExceeded("exact daily CVRP is limited to " + std::to_string(kMaxExactDayCustomers) + " customers");
  if (n == 0) return {};
  const std::size_t full = (std::size_t{1} << n) - 1;
  constexpr Value inf = kValueMax;

  std::vector<Value> demand(full + 1, 0);
  for (std::size_t s = 1; s <= full; ++s) {
    const auto low = static_cast<std::size_t>(std::countr_zero(s));
    demand[s] = demand[s & (s - 1)] + inst.customers[day[low]].demand;
  }
  // Held-Karp: path[s][j] = shortest depot -> ... -> j visiting exactly s.
  std::vector<Value> path((full + 1) * n, inf);
  for (std::size_t j = 0; j < n; ++j) path[(std::size_t{1} << j) * n + j] = distance(inst.depot, inst.customers[day[j]].at);
  for (std::size_t s = 1; s <= full; ++s) {
    if (demand[s] > inst.capacity) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const Value base = path[s * n + j];
      if (!(s >> j & 1) || base == inf) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (s >> k & 1) continue;
        const auto t = s | (std::size_t{1} << k);
        const Value v = base + distance(inst.customers[day[j]].at, inst.customers[day[k]].at);
        path[t * n + k] = std::min(path[t * n + k], v);
      }
    }
  }
  std::vector<Value> route(full + 1, inf);
  for (std::size_t s = 1; s <= full; ++s) {
    if (demand[s] > inst.capacity) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (path[s * n + j] != inf)
        route[s] = std::min(route[s], path[s * n + j] + distance(inst.customers[day[j]].at, inst.depot));
  }
  // best[r][s]: cover s with at most r routes.
  const auto K = static_cast<std::size_t>(inst.vehicles);
  std::vector<std::vector<Value>> best(K + 1, std::vector<Value>(full + 1, inf));
  std::vector<std::vector<std::size_t>> choice(K + 1, std::vector<std::size_t>(full + 1, 0));
  for (std::size_t r = 0; r <= K; ++r) best[r][0] = 0;
  for (std::size_t r = 1; r <= K; ++r)
    for (std::size_t s = 1; s <= full; ++s) {
      const auto low = s & (~s + 1);
      for (std::size_t sub = s; sub; sub = (sub - 1) & s) {
        if (!(sub & low) || route[sub] == inf || best[r - 1][s ^ sub] == inf) continue;
        const Value v = route[sub] + best[r - 1][s ^ sub];
        if (v < best[r][s]) {
          best[r][s] = v;
          choice[r][s] = sub;
        }
      }
    }
  if (best[K][full] == inf) throw InvalidInput("daily CVRP infeasible with the given vehicles and capacity");
  DaySolution out;
  out.cost = best[K][full];
  std::size_t s = full;
  for (std::size_t r = K; s && r > 0; --r) {
    const auto sub = choice[r][s];
    out.route_costs.push_back(route[sub]);
    s ^= sub;
  }
  return out;
}

/// Minimum over assignments of each day's routes to distinct vehicles of the
/// largest vehicle workload.
inline Value balanced_workload(const std::vector<DaySolution>& days, std::size_t vehicles) {
  std::vector<Value> load(vehicles, 0);
  Value best = kValueMax;
  auto rec = [&](auto&& self, std::size_t t, std::size_t r, std::vector<bool>& used) -> void {
    if (t == days.size()) {
      best = std::min(best, *std::max_element(load.begin(), load.end()));
      return;
    }
    if (r == days[t].route_costs.size()) {
      std::vector<bool> fresh(vehicles, false);
      self(self, t + 1, 0, fresh);
      return;
    }
    for (std::size_t v = 0; v < vehicles; ++v) {
      if (used[v]) continue;
      load[v] += days[t].route_costs[r];
      if (load[v] < best) {
        used[v] = true;
        self(self, t, r + 1, used);
        used[v] = false;
      }
      load[v] -= days[t].route_costs[r];
    }
  };
  std::vector<bool> used(vehicles, false);
  rec(rec, 0, 0, used);
  return best;
}

// ---------------------------------------------------------------------------
// Coordinate sources.

struct CoordinateSource {
  Point depot;
  std::vector<Point> points;
  std::vector<Value> demands;  // empty when the file has no demand section
};

/// Reads NODE_COORD_SECTION / DEMAND_SECTION / DEPOT_SECTION of a CVRP file.
inline CoordinateSource read_cvrp_coordinates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open coordinate file " + path);
  std::vector<std::pair<long, Point>> nodes;
  std::vector<std::pair<long, Value>> demands;
  long depot_id = 1;
  std::string line, section;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head.find("_SECTION") != std::string::npos || head == "EOF") {
      section = head;
      continue;
    }
    if (section.empty()) continue;
    if (section == "NODE_COORD_SECTION") {
      double x = 0, y = 0;
      if (!(ls >> x >> y)) throw InvalidInput("malformed coordinate line: " + line);
      nodes.emplace_back(std::stol(head), Point{std::llround(x), std::llround(y)});
    } else if (section == "DEMAND_SECTION") {
      Value d = 0;
      if (!(ls >> d)) throw InvalidInput("malformed demand line: " + line);
      demands.emplace_back(std::stol(head), d);
    } else if (section == "DEPOT_SECTION") {
      const long id = std::stol(head);
      if (id > 0) depot_id = id;
      section = "DONE";
    }
  }
  if (nodes.size() < 2) throw InvalidInput("coordinate file has too few nodes");
  CoordinateSource src;
  std::map<long, Value> dem(demands.begin(), demands.end());
  bool have_depot = false;
  for (const auto& [id, p] : nodes) {
    if (id == depot_id) {
      src.depot = p;
      have_depot = true;
      continue;
    }
    src.points.push_back(p);
    if (!dem.empty()) src.demands.push_back(dem.count(id) ? dem[id] : 0);
  }
  if (!have_depot) throw InvalidInput("depot node missing from coordinate section");
  return src;
}

/// Uniform random points on [0, 1000]^2 with the depot at the centre.
inline CoordinateSource random_coordinates(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Value> coord(0, 1000), dem(1, 10);
  CoordinateSource src;
  src.depot = Point{500, 500};
  for (std::size_t i = 0; i < count; ++i) {
    src.points.push_back(Point{coord(rng), coord(rng)});
    src.demands.push_back(dem(rng));
  }
  return src;
}

struct GeneratorParams {
  std::size_t customers_per_day = 10;
  std::size_t days = 3;
  std::int64_t vehicles = 3;
  double delta = 0.5;
  std::uint64_t seed = 1;
  /// Zero derives a capacity from the drawn demands.
  Value capacity = 0;
};

/// Draws disjoint customer sets per day around a shared depot and sets the
/// distance cap between the balanced lower bound and the sequential workload.
inline Instance generate_instance(const CoordinateSource& src, const GeneratorParams& params) {
  const auto n = params.customers_per_day, T = params.days;
  if (n == 0 || T == 0 || params.vehicles <= 0) throw InvalidInput("generator needs customers, days and vehicles");
  if (n * T > src.points.size()) throw InvalidInput("coordinate source has too few points");
  if (params.delta < 0.0 || params.delta > 1.0) throw InvalidInput("delta must lie in [0, 1]");
  if (n > kMaxExactDayCustomers)
    throw CapacityExceeded("cap computation solves daily CVRPs exactly; at most 14 customers per day");

  std::mt19937_64 rng(params.seed);
  std::vector<std::size_t> order(src.points.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<Value> dem(1, 10);

  Instance inst;
  inst.days = T;
  inst.vehicles = params.vehicles;
  inst.depot = src.depot;
  inst.delta = params.delta;
  inst.seed = params.seed;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < n; ++k) {
      const auto idx = order[t * n + k];
      const Value d = src.demands.empty() ? dem(rng) : std::max<Value>(1, src.demands[idx]);
      inst.customers.push_back(Customer{src.points[idx], d, t});
    }

  Value max_demand = 0, max_day = 0;
  for (std::size_t t = 0; t < T; ++t) {
    Value s = 0;
    for (auto ci : inst.customers_of_day(t)) {
      s += inst.customers[ci].demand;
      max_demand = std::max(max_demand, inst.customers[ci].demand);
    }
    max_day = std::max(max_day, s);
  }
  inst.capacity = params.capacity > 0
                      ? params.capacity
                      : std::max(max_demand, static_cast<Value>(std::ceil(1.25 * static_cast<double>(max_day) /
                                                                         static_cast<double>(params.vehicles))));

  std::vector<DaySolution> sols;
  double total = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    sols.push_back(solve_day_exact(inst, inst.customers_of_day(t)));
    total += static_cast<double>(sols.back().cost);
  }
  inst.d_min = total / static_cast<double>(params.vehicles);
  inst.d_max = static_cast<double>(balanced_workload(sols, static_cast<std::size_t>(params.vehicles)));
  inst.distance_cap = std::max<Value>(1, distance_cap(inst.d_min, inst.d_max, params.delta));
  return inst;
}

// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Instance& inst) {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : inst.customers) cs.push_back({{"x", c.at.x}, {"y", c.at.y}, {"demand", c.demand}, {"day", c.day}});
  return nlohmann::json{{"type", "mpcvrp"},
                        {"days", inst.days},
                        {"vehicles", inst.vehicles},
                        {"capacity", inst.capacity},
                        {"depot", {inst.depot.x, inst.depot.y}},
                        {"customers", cs},
                        {"D", inst.distance_cap},
                        {"delta", inst.delta},
                        {"D_min", inst.d_min},
                        {"D_max", inst.d_max},
                        {"seed", inst.seed}};
}

inline Instance instance_from_json(const nlohmann::json& j) {
  try {
    Instance inst;
    inst.days = j.at("days").get<std::size_t>();
    inst.vehicles = j.at("vehicles").get<std::int64_t>();
    inst.capacity = j.at("capacity").get<Value>();
    inst.depot = Point{j.at("depot").at(0).get<Value>(), j.at("depot").at(1).get<Value>()};
    for (const auto& c : j.at("customers"))
      inst.customers.push_back(Customer{Point{c.at("x").get<Value>(), c.at("y").get<Value>()},
                                        c.at("demand").get<Value>(), c.at("day").get<std::size_t>()});
    inst.distance_cap = j.at("D").get<Value>();
    inst.delta = j.value("delta", 1.0);
    inst.d_min = j.value("D_min", 0.0);
    inst.d_max = j.value("D_max", 0.0);
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed mpcvrp instance: ") + e.what());
  }
}

}  // namespace nestcg::mpcvrp
