#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <unordered_set>

#include "derwent/data.hpp"
#include "derwent/error.hpp"

namespace derwent {
namespace {

void check_instance(const Instance& inst, std::size_t d_in) {
  const std::string who = "instance " + std::to_string(inst.id);
  if (inst.features.size() != d_in) throw ConfigError(who + ": wrong feature width");
  if (inst.domain == Domain::Auxiliary && inst.label.has_value()) {
    throw ConfigError(who + ": auxiliary instances must be unlabeled");
  }
  if (inst.domain != Domain::Auxiliary && !inst.label.has_value()) {
    throw ConfigError(who + ": source and target instances need a label");
  }
  if (inst.label.has_value() && *inst.label != 0 && *inst.label != 1) {
    throw ConfigError(who + ": labels must be 0 or 1");
  }
}

}  // namespace

void validate(const Datasets& data) {
  if (data.d_in == 0) throw ConfigError("dataset: d_in must be >= 1");
  std::unordered_set<std::int64_t> ids;
  auto check_pool = [&](const std::vector<Instance>& pool, Domain expected, const char* name) {
    for (const Instance& inst : pool) {
      if (inst.domain != expected) {
        throw ConfigError(std::string("dataset: wrong domain in ") + name + " pool");
      }
      check_instance(inst, data.d_in);
      if (!ids.insert(inst.id).second) {
        throw ConfigError("dataset: duplicate id " + std::to_string(inst.id));
      }
    }
  };
  check_pool(data.source, Domain::Source, "source");
  check_pool(data.auxiliary, Domain::Auxiliary, "auxiliary");
  check_pool(data.target_train, Domain::Target, "target train");
  check_pool(data.target_test, Domain::Target, "target test");
}

void split_target(std::vector<Instance> target, std::size_t per_class,
                  std::vector<Instance>& train, std::vector<Instance>& test) {
  train.clear();
  test.clear();
  std::size_t taken[2] = {0, 0};
  for (Instance& inst : target) {
    if (!inst.label.has_value()) throw ConfigError("split_target: unlabeled target instance");
    const int y = *inst.label;
    if (y != 0 && y != 1) throw ConfigError("split_target: labels must be 0 or 1");
    if (taken[y] < per_class) {
      ++taken[y];
      train.push_back(std::move(inst));
    } else {
      test.push_back(std::move(inst));
    }
  }
  if (taken[0] < per_class || taken[1] < per_class) {
    throw ConfigError("split_target: fewer than " + std::to_string(per_class) +
                      " target instances in some class");
  }
}

double chain_angle(const ChainOptions& o, std::size_t k) {
  return static_cast<double>(k) * std::numbers::pi / static_cast<double>(o.n_domains - 1);
}

std::vector<double> chain_class_mean(const ChainOptions& o, std::size_t k, int y) {
  if (k >= o.n_domains) throw ConfigError("chain_class_mean: domain index out of range");
  std::vector<double> mean(o.d_in, 0.0);
  const double angle = chain_angle(o, k);
  const double sign = y == 1 ? 1.0 : -1.0;
  // The in-plane part of the class shift turns with the domain.
  const double in_plane = o.radius + sign * o.class_shift * std::sin(o.class_tilt);
  mean[0] = in_plane * std::cos(angle);
  mean[1] = in_plane * std::sin(angle);
  mean[2] = sign * o.class_shift * std::cos(o.class_tilt);
  return mean;
}

Datasets gen_synthetic_chain(const ChainOptions& o) {
  if (o.n_domains < 3) throw ConfigError("gen_synthetic_chain: n_domains must be >= 3");
  if (o.per_domain < 2) throw ConfigError("gen_synthetic_chain: per_domain must be >= 2");
  if (o.d_in < 3) throw ConfigError("gen_synthetic_chain: d_in must be >= 3");
  if (2 * o.labeled_target_per_class >= o.per_domain) {
    throw ConfigError("gen_synthetic_chain: no target instances left for testing");
  }
  if (!(o.noise >= 0.0) || !(o.radius > 0.0) || !(o.class_shift >= 0.0)) {
    throw ConfigError("gen_synthetic_chain: radius must be positive, noise/shift non-negative");
  }
  if (!(std::abs(o.class_tilt) <= std::numbers::pi / 2)) {
    throw ConfigError("gen_synthetic_chain: class_tilt must lie in [-pi/2, pi/2]");
  }

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Datasets data;
  data.d_in = o.d_in;
  std::vector<Instance> target;
  for (std::size_t k = 0; k < o.n_domains; ++k) {
    const double angle = chain_angle(o, k);
    const std::vector<double> means[2] = {chain_class_mean(o, k, 0), chain_class_mean(o, k, 1)};
    const Domain domain = k == 0                 ? Domain::Source
                          : k + 1 == o.n_domains ? Domain::Target
                                                 : Domain::Auxiliary;
    for (std::size_t i = 0; i < o.per_domain; ++i) {
      const int y = static_cast<int>(i % 2);
      Instance inst;
      inst.id = static_cast<std::int64_t>(k * o.per_domain + i);
      inst.domain = domain;
      inst.meta = angle;
      inst.features.resize(o.d_in);
      for (std::size_t c = 0; c < o.d_in; ++c) {
        inst.features[c] = means[y][c] + o.noise * gauss(rng);
      }
      if (domain != Domain::Auxiliary) inst.label = y;
      switch (domain) {
        case Domain::Source:
          data.source.push_back(std::move(inst));
          break;
        case Domain::Auxiliary:
          data.auxiliary.push_back(std::move(inst));
          break;
        case Domain::Target:
          target.push_back(std::move(inst));
          break;
      }
    }
  }
  split_target(std::move(target), o.labeled_target_per_class, data.target_train,
               data.target_test);
  return data;
}

Matrix feature_matrix(const std::vector<const Instance*>& instances) {
  if (instances.empty()) return Matrix();
  const std::size_t d = instances.front()->features.size();
  Matrix m(instances.size(), d);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i]->features.size() != d) throw DimensionError("feature_matrix: ragged rows");
    std::copy(instances[i]->features.begin(), instances[i]->features.end(),
              m.row_span(i).begin());
  }
  return m;
}

}  // namespace derwent
