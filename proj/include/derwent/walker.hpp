#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "derwent/batch_graph.hpp"

namespace derwent {

using Rng = std::mt19937_64;

// SplitMix64 of (master, index); gives each walk or batch its own stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

enum class Direction { SourceToTarget, TargetToSource };

std::string_view to_string(Direction d);
Domain origin_domain(Direction d);
Domain destination_domain(Direction d);

struct WalkSequence {
  std::vector<std::size_t> nodes;
  Direction direction = Direction::SourceToTarget;
  // Whether the last node lies in the destination domain.
  bool reached = false;
  // negatives[j] is the dissimilar node paired with nodes[j]; one per
  // position except the last.
  std::vector<std::size_t> negatives;

  std::size_t length() const { return nodes.size(); }
};

// Graph temperature for `epoch` (0-based): eta0^(1 + floor(epoch / 3)).
double eta_schedule(int epoch, double eta0 = 1.1);

// Steps to a neighbour with probability proportional to edge weight until a
// destination-domain node is entered or `theta` nodes have been visited.
WalkSequence sample_walk(const BatchGraph& g, std::size_t start, Direction direction, int theta,
                         Rng& rng);

// Uniform over batch nodes not in `seq`.
std::size_t sample_negative(const BatchGraph& g, std::span<const std::size_t> seq, Rng& rng);

// One walk from every origin-domain node, in node order. Walk k draws from
// derive_seed(seed, k).
std::vector<WalkSequence> sample_batch_walks(const BatchGraph& g, Direction direction, int theta,
                                             std::uint64_t seed);

// A walk resolved to instance ids, as written to walk dumps and path exports.
struct PathRecord {
  Direction direction = Direction::SourceToTarget;
  std::vector<std::int64_t> instance_ids;
  std::vector<Domain> domains;
  // cosines[k] is the embedding cosine between nodes k and k+1.
  std::vector<double> cosines;
  bool reached = false;
  int epoch = 0;

  friend bool operator==(const PathRecord&, const PathRecord&) = default;
};

PathRecord to_record(const BatchGraph& g, const WalkSequence& walk, int epoch);

// One line per record:
//   <direction> reached=<0|1> epoch=<e> ids=<id,..> domains=<S,A,..> cos=<c,..>
void write_walk_dump(std::ostream& out, std::span<const PathRecord> records);

}  // namespace derwent
