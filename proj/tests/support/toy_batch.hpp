#pragma once

// A fixed 12-node batch (3 source, 6 auxiliary, 3 target) with two walks in
// each direction, at reduced network widths so every parameter can be
// checked by finite differences.

#include <optional>
#include <random>
#include <vector>

#include "derwent/losses.hpp"
#include "derwent/nets.hpp"
#include "support/finite_diff.hpp"

namespace derwent::testing {

struct ToyBatch {
  ParameterSet params;
  Matrix inputs;
  std::vector<Domain> domains;
  std::vector<std::optional<int>> labels;
  std::vector<WalkSequence> walks;

  NodeInfo info() const { return NodeInfo{domains, labels}; }

  static WalkSequence walk(Direction d, bool reached, std::vector<std::size_t> nodes,
                           std::vector<std::size_t> negatives) {
    WalkSequence w;
    w.direction = d;
    w.reached = reached;
    w.nodes = std::move(nodes);
    w.negatives = std::move(negatives);
    return w;
  }

  static ToyBatch make(std::uint64_t seed = 2024) {
    ToyBatch b;
    b.params = init_params(seed, NetDims{4, 6, 3});
    std::mt19937_64 rng(seed);
    b.inputs = random_matrix(12, 4, rng, -2.0, 2.0);
    // Nodes 0-2 source, 3-8 auxiliary, 9-11 target.
    for (std::size_t n = 0; n < 12; ++n) {
      const Domain d = n < 3 ? Domain::Source : (n < 9 ? Domain::Auxiliary : Domain::Target);
      b.domains.push_back(d);
      b.labels.push_back(d == Domain::Auxiliary ? std::nullopt
                                                : std::optional<int>(static_cast<int>(n % 2)));
    }
    const auto s2t = Direction::SourceToTarget;
    const auto t2s = Direction::TargetToSource;
    b.walks = {
        walk(s2t, true, {0, 3, 4, 9}, {7, 11, 2}),
        walk(s2t, false, {1, 5, 2, 6}, {8, 0, 10}),
        // Reached, with the starting target revisited.
        walk(t2s, true, {10, 7, 10, 4, 1}, {3, 9, 0, 5}),
        walk(t2s, false, {11, 8, 9, 6}, {2, 3, 1}),
    };
    return b;
  }
};

}  // namespace derwent::testing
