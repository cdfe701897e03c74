#pragma once

#include <random>
#include <vector>

#include "nestcg/nestcg.hpp"

namespace testing_support {

using namespace nestcg;

/// Block on `ids` where every element has entry and exit arcs and the listed
/// intra arcs; one subpath resource "load" when `cap` > 0.
inline Block chain_block(std::vector<ElementId> ids, std::size_t dim, Value cap = 0) {
  Block b;
  b.elements = ids;
  const std::size_t m = cap > 0 ? 1 : 0;
  for (auto e : ids) {
    b.entries.push_back(EndpointArc{e, 0, IntVec(m, 0), IntVec(dim, 0)});
    b.exits.push_back(EndpointArc{e, 0, IntVec(m, 0), IntVec(dim, 0)});
  }
  if (cap > 0) {
    SubpathResource r;
    r.name = "load";
    for (auto e : ids) r.windows[e] = Window{0, cap};
    b.resources.push_back(r);
  }
  return b;
}

inline PathResource sum_resource(Value bound, std::size_t dim = 1) {
  PathResource r;
  r.name = "dist";
  r.dim = dim;
  r.aggregator = Aggregator::sum;
  r.coeff.assign(dim, 1);
  r.bound = bound;
  return r;
}

inline PathResource max_resource(IntVec coeff, Value bound) {
  PathResource r;
  r.name = "span";
  r.dim = coeff.size();
  r.aggregator = Aggregator::max;
  r.coeff = std::move(coeff);
  r.bound = bound;
  return r;
}

/// Random corpus instance: the shapes rotate with the seed so that sum/max,
/// one/two dimensions and negative deltas all appear.
inline synth::Built corpus_instance(std::uint64_t seed, std::size_t max_subpaths = 8) {
  synth::RandomParams p;
  p.seed = seed;
  p.blocks = 2 + seed % 2;
  p.elements_per_block = 3 + seed % 2;
  p.shape = static_cast<synth::RandomParams::Shape>(seed % 3);
  p.negative_deltas = seed % 5 == 4;
  p.max_subpaths_per_block = max_subpaths;
  return synth::random_instance(p);
}

}  // namespace testing_support
