#pragma once

// JSON form of a nested problem.
//
// {"blocks": [{"elements": [0, 1], "arcs": [[u, v, cost, sub..., path...], ...]}],
//  "subpath_resources": [{"block": 0, "name": "load", "floor": false, "windows": [[e, lo, hi], ...]}],
//  "path_resources": [{"name": "dist", "dim": 1, "agg": "sum", "a": [1], "b": 100}],
//  "source_arcs": [[e, cost, sub..., path...]], "sink_arcs": [[e, cost, sub..., path...]],
//  "coverage": [...], "sense": "cover", "cardinality": 3}
//
// Delta order in every arc: the block's subpath resources in listing order,
// then all path-resource coordinates.

#include <fstream>
#include <string>

#include <json.hpp>

#include "nestcg/driver.hpp"
#include "nestcg/model.hpp"

namespace nestcg {

struct NestedInstance {
  NestedProblem problem;
  MasterSpec master;
};

inline NestedInstance nested_from_json(const nlohmann::json& j) {
  try {
    std::vector<Block> blocks;
    std::vector<std::size_t> block_of;
    for (const auto& jb : j.at("blocks")) {
      Block b;
      b.elements = jb.at("elements").get<std::vector<ElementId>>();
      for (ElementId e : b.elements) {
        if (e < 0) throw InvalidInput("negative element id");
        if (static_cast<std::size_t>(e) >= block_of.size()) block_of.resize(e + 1, NestedProblem::npos);
        block_of[e] = blocks.size();
      }
      blocks.push_back(std::move(b));
    }
    auto block_index = [&](ElementId e) {
      if (e < 0 || static_cast<std::size_t>(e) >= block_of.size() || block_of[e] == NestedProblem::npos)
        throw InvalidInput("unknown element id " + std::to_string(e));
      return block_of[e];
    };

    for (const auto& jr : j.value("subpath_resources", nlohmann::json::array())) {
      const auto bi = jr.at("block").get<std::size_t>();
      if (bi >= blocks.size()) throw InvalidInput("subpath resource names an unknown block");
      SubpathResource r;
      r.name = jr.value("name", "");
      r.floor_at_lower = jr.value("floor", false);
      for (const auto& w : jr.value("windows", nlohmann::json::array()))
        r.windows[w.at(0).get<ElementId>()] = Window{w.at(1).get<Value>(), w.at(2).get<Value>()};
      blocks[bi].resources.push_back(std::move(r));
    }

    std::vector<PathResource> prs;
    std::size_t dim = 0;
    for (const auto& jp : j.value("path_resources", nlohmann::json::array())) {
      PathResource pr;
      pr.name = jp.value("name", "");
      pr.dim = jp.at("dim").get<std::size_t>();
      const auto agg = jp.at("agg").get<std::string>();
      if (agg == "sum") pr.aggregator = Aggregator::sum;
      else if (agg == "max") pr.aggregator = Aggregator::max;
      else throw InvalidInput("unknown aggregator " + agg);
      pr.coeff = jp.at("a").get<IntVec>();
      pr.bound = jp.at("b").get<Value>();
      dim += pr.dim;
      prs.push_back(std::move(pr));
    }

    auto split = [&](const nlohmann::json& row, std::size_t first, std::size_t m, IntVec& sub, IntVec& path) {
      if (row.size() != first + m + dim) throw InvalidInput("arc has wrong number of deltas");
      for (std::size_t k = 0; k < m; ++k) sub.push_back(row.at(first + k).get<Value>());
      for (std::size_t k = 0; k < dim; ++k) path.push_back(row.at(first + m + k).get<Value>());
    };

    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& jb = j.at("blocks").at(bi);
      for (const auto& row : jb.value("arcs", nlohmann::json::array())) {
        Arc a;
        a.from = row.at(0).get<ElementId>();
        a.to = row.at(1).get<ElementId>();
        a.cost = row.at(2).get<Cost>();
        split(row, 3, blocks[bi].resources.size(), a.sub_delta, a.path_delta);
        blocks[bi].arcs.push_back(std::move(a));
      }
    }
    auto endpoint = [&](const nlohmann::json& row, bool entry) {
      EndpointArc a;
      a.element = row.at(0).get<ElementId>();
      a.cost = row.at(1).get<Cost>();
      const auto bi = block_index(a.element);
      split(row, 2, blocks[bi].resources.size(), a.sub_delta, a.path_delta);
      (entry ? blocks[bi].entries : blocks[bi].exits).push_back(std::move(a));
    };
    for (const auto& row : j.value("source_arcs", nlohmann::json::array())) endpoint(row, true);
    for (const auto& row : j.value("sink_arcs", nlohmann::json::array())) endpoint(row, false);

    auto coverage = j.value("coverage", std::vector<ElementId>{});
    NestedInstance inst{NestedProblem(std::move(blocks), std::move(prs), std::move(coverage)), {}};
    const auto sense = j.value("sense", std::string("cover"));
    if (sense == "cover") inst.master.sense = Sense::cover;
    else if (sense == "partition") inst.master.sense = Sense::partition;
    else throw InvalidInput("unknown sense " + sense);
    if (j.contains("cardinality") && !j.at("cardinality").is_null())
      inst.master.cardinality = j.at("cardinality").get<std::int64_t>();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed nested instance: ") + e.what());
  }
}

inline nlohmann::json to_json(const NestedProblem& p, const MasterSpec& master) {
  nlohmann::json j;
  j["type"] = "nested";
  j["blocks"] = nlohmann::json::array();
  j["subpath_resources"] = nlohmann::json::array();
  j["source_arcs"] = nlohmann::json::array();
  j["sink_arcs"] = nlohmann::json::array();
  auto row = [](auto head, const IntVec& sub, const IntVec& path) {
    nlohmann::json r = head;
    for (Value v : sub) r.push_back(v);
    for (Value v : path) r.push_back(v);
    return r;
  };
  for (std::size_t i = 0; i < p.block_count(); ++i) {
    const auto& b = p.block(i);
    nlohmann::json jb{{"elements", b.elements}, {"arcs", nlohmann::json::array()}};
    for (const auto& a : b.arcs) jb["arcs"].push_back(row(nlohmann::json{a.from, a.to, a.cost}, a.sub_delta, a.path_delta));
    j["blocks"].push_back(std::move(jb));
    for (const auto& r : b.resources) {
      nlohmann::json w = nlohmann::json::array();
      for (const auto& [e, win] : r.windows) w.push_back({e, win.lo, win.hi});
      j["subpath_resources"].push_back({{"block", i}, {"name", r.name}, {"floor", r.floor_at_lower}, {"windows", w}});
    }
    for (const auto& a : b.entries) j["source_arcs"].push_back(row(nlohmann::json{a.element, a.cost}, a.sub_delta, a.path_delta));
    for (const auto& a : b.exits) j["sink_arcs"].push_back(row(nlohmann::json{a.element, a.cost}, a.sub_delta, a.path_delta));
  }
  j["path_resources"] = nlohmann::json::array();
  for (const auto& pr : p.path_resources())
    j["path_resources"].push_back({{"name", pr.name},
                                   {"dim", pr.dim},
                                   {"agg", pr.aggregator == Aggregator::sum ? "sum" : "max"},
                                   {"a", pr.coeff},
                                   {"b", pr.bound}});
  j["coverage"] = p.coverage();
  j["sense"] = to_string(master.sense);
  j["cardinality"] = master.cardinality ? nlohmann::json(*master.cardinality) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace nestcg
