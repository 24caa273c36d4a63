#include "derwent/walker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <string>

#include "derwent/error.hpp"

namespace derwent {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string_view to_string(Direction d) {
  return d == Direction::SourceToTarget ? "SourceToTarget" : "TargetToSource";
}

Domain origin_domain(Direction d) {
  return d == Direction::SourceToTarget ? Domain::Source : Domain::Target;
}

Domain destination_domain(Direction d) {
  return d == Direction::SourceToTarget ? Domain::Target : Domain::Source;
}

double eta_schedule(int epoch, double eta0) {
  if (epoch < 0) epoch = 0;
  return std::pow(eta0, 1 + epoch / 3);
}

WalkSequence sample_walk(const BatchGraph& g, std::size_t start, Direction direction, int theta,
                         Rng& rng) {
  if (theta < 2) throw ConfigError("sample_walk: theta must be >= 2");
  if (start >= g.size()) throw SamplingError("sample_walk: start node out of range");
  if (g.domain(start) != origin_domain(direction)) {
    throw SamplingError("sample_walk: start node is not in the " +
                        std::string(to_string(origin_domain(direction))) + " domain");
  }
  const Domain dest = destination_domain(direction);
  WalkSequence walk;
  walk.direction = direction;
  walk.nodes.push_back(start);
  std::size_t current = start;
  while (walk.nodes.size() < static_cast<std::size_t>(theta)) {
    const auto row = g.weights().row_span(current);
    if (std::all_of(row.begin(), row.end(), [](double w) { return w == 0.0; })) {
      throw SamplingError("sample_walk: node " + std::to_string(current) + " is isolated");
    }
    std::discrete_distribution<std::size_t> step(row.begin(), row.end());
    current = step(rng);
    walk.nodes.push_back(current);
    if (g.domain(current) == dest) {
      walk.reached = true;
      break;
    }
  }
  walk.negatives.reserve(walk.nodes.size() - 1);
  for (std::size_t j = 0; j + 1 < walk.nodes.size(); ++j) {
    walk.negatives.push_back(sample_negative(g, walk.nodes, rng));
  }
  return walk;
}

std::size_t sample_negative(const BatchGraph& g, std::span<const std::size_t> seq, Rng& rng) {
  std::vector<char> in_seq(g.size(), 0);
  for (std::size_t v : seq) {
    if (v >= g.size()) throw SamplingError("sample_negative: node out of range");
    in_seq[v] = 1;
  }
  std::vector<std::size_t> candidates;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (!in_seq[v]) candidates.push_back(v);
  }
  if (candidates.empty()) {
    throw SamplingError("sample_negative: the sequence covers the whole batch");
  }
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

std::vector<WalkSequence> sample_batch_walks(const BatchGraph& g, Direction direction, int theta,
                                             std::uint64_t seed) {
  const Domain origin = origin_domain(direction);
  std::vector<std::size_t> starts;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (g.domain(v) == origin) starts.push_back(v);
  }
  std::vector<WalkSequence> walks(starts.size());
  const std::int64_t count = static_cast<std::int64_t>(starts.size());
  std::exception_ptr failure;
  // Each walk has its own stream, so scheduling cannot change the result.
#pragma omp parallel for schedule(dynamic) if (count >= 16)
  for (std::int64_t k = 0; k < count; ++k) {
    try {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
      walks[k] = sample_walk(g, starts[k], direction, theta, rng);
    } catch (...) {
#pragma omp critical(derwent_walk_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return walks;
}

PathRecord to_record(const BatchGraph& g, const WalkSequence& walk, int epoch) {
  PathRecord r;
  r.direction = walk.direction;
  r.reached = walk.reached;
  r.epoch = epoch;
  for (std::size_t k = 0; k < walk.nodes.size(); ++k) {
    r.instance_ids.push_back(g.instance_id(walk.nodes[k]));
    r.domains.push_back(g.domain(walk.nodes[k]));
    if (k + 1 < walk.nodes.size()) r.cosines.push_back(g.cosine(walk.nodes[k], walk.nodes[k + 1]));
  }
  return r;
}

void write_walk_dump(std::ostream& out, std::span<const PathRecord> records) {
  char buf[32];
  for (const PathRecord& r : records) {
    out << to_string(r.direction) << " reached=" << (r.reached ? 1 : 0) << " epoch=" << r.epoch
        << " ids=";
    for (std::size_t k = 0; k < r.instance_ids.size(); ++k) {
      out << (k ? "," : "") << r.instance_ids[k];
    }
    out << " domains=";
    for (std::size_t k = 0; k < r.domains.size(); ++k) {
      out << (k ? "," : "") << domain_tag(r.domains[k]);
    }
    out << " cos=";
    for (std::size_t k = 0; k < r.cosines.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.6f", r.cosines[k]);
      out << (k ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace derwent
