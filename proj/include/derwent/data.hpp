#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "derwent/domain.hpp"
#include "derwent/matrix.hpp"

namespace derwent {

struct Instance {
  std::vector<double> features;
  Domain domain = Domain::Auxiliary;
  // Present for source and target instances, absent for auxiliary ones.
  std::optional<int> label;
  std::int64_t id = 0;
  // Diagnostic only; the synthetic chain stores the domain's rotation angle.
  std::optional<double> meta;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Datasets {
  std::size_t d_in = 0;
  std::vector<Instance> source;
  std::vector<Instance> auxiliary;
  std::vector<Instance> target_train;
  std::vector<Instance> target_test;

  friend bool operator==(const Datasets&, const Datasets&) = default;
};

// Throws ConfigError unless every instance has width d_in, auxiliary
// instances are unlabeled, labeled ones carry 0/1 and ids are unique.
void validate(const Datasets& data);

// The first `per_class` target instances of each class (in input order) are
// kept for training, the remainder become the test set.
void split_target(std::vector<Instance> target, std::size_t per_class,
                  std::vector<Instance>& train, std::vector<Instance>& test);

// A chain of domains obtained by rotating one two-class problem around a
// fixed plane.
//
// Domain k of n sits at angle a_k = k * pi / (n - 1) on the circle of radius
// `radius` spanned by the first two coordinates. Its two classes are shifted
// by +/- `class_shift` along cos(t) * e_3 + sin(t) * u_k, where t is
// `class_tilt` and u_k the domain's unit radial direction, and every instance
// gets isotropic Gaussian noise of scale `noise`. Domain 0 is the labeled source,
// domain n - 1 the target, and the interior domains form the unlabeled
// auxiliary pool. Ids run domain by domain; classes alternate within a domain.
struct ChainOptions {
  std::size_t n_domains = 5;
  std::size_t per_domain = 200;
  std::size_t d_in = 16;
  std::size_t labeled_target_per_class = 10;
  std::uint64_t seed = 0;
  // With no tilt, source and target class means have cosine
  // (b^2 - R^2) / (b^2 + R^2) < 0, while neighbouring domains sit well inside
  // one noise scale of each other.
  double radius = 1.5;
  double class_shift = 1.0;
  // Radians; tilts the class shift from the third coordinate toward the
  // domain's radial direction, so part of the class boundary turns with the
  // domain and the target boundary differs from the source one.
  double class_tilt = 0.0;
  double noise = 2.0;

  friend bool operator==(const ChainOptions&, const ChainOptions&) = default;
};

Datasets gen_synthetic_chain(const ChainOptions& options);

// Angle of domain k and the generating mean of class y in that domain.
double chain_angle(const ChainOptions& options, std::size_t k);
std::vector<double> chain_class_mean(const ChainOptions& options, std::size_t k, int y);

// Row-stacked features.
Matrix feature_matrix(const std::vector<const Instance*>& instances);

}  // namespace derwent
