#pragma once

// The three walk losses and the combined per-batch objective.
//
//   l1  similarity: adjacent walk nodes pulled together, a sampled outsider
//       pushed away, both through the alpha-scaled sigmoid of the cosine.
//   l2  reconstruction: the walk's last embedding predicted from the rest by
//       the BiLSTM encoder and the decoder.
//   l3  weighted cross-entropy over the labeled nodes of the walk.
//
// Per walk the objective adds l1 + o * (lambda1 * l2 + lambda2 * l3), where o
// says whether the walk reached its destination domain. Target-to-source
// walks additionally keep their starting target's cross-entropy term when
// o = 0; that term is counted inside l3.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "derwent/autodiff.hpp"
#include "derwent/domain.hpp"
#include "derwent/matrix.hpp"
#include "derwent/nets.hpp"
#include "derwent/walker.hpp"

namespace derwent {

struct LossSettings {
  double alpha = 3.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  // When false, l2 is never evaluated (the w/o-LSTM variant).
  bool reconstruction = true;
  // Instance weights to use instead of computing them, in the order of
  // LossReport::weights. Empty means computed. Lets finite-difference checks
  // hold the detached weights constant.
  std::span<const double> fixed_weights;
};

// Sum over j of -ln s(cos(x_j, x_{j+1})) - ln(1 - s(cos(x_j, z_j))) with
// s the alpha-scaled sigmoid. A single-node sequence yields 0.
ad::Var similarity_loss(ad::Tape& tape, std::span<const ad::Var> seq,
                        std::span<const ad::Var> negatives, double alpha);

// || x_n - decode(lstm(x_1..x_{n-1})) ||. Requires n >= 2.
ad::Var reconstruction_loss(const ParamVars& params, std::span<const ad::Var> seq);

// 1 for target instances, s_alpha(cos(x, anchor)) for source instances.
double instance_weight(std::span<const double> x, std::span<const double> anchor, Domain domain,
                       double alpha);

struct LabeledTerm {
  ad::Var embedding;
  int label = 0;
  double weight = 1.0;
};

// Sum of weight * binary cross-entropy of sigmoid(classify(embedding)).
ad::Var classification_loss(ad::Tape& tape, const ParamVars& params,
                            std::span<const LabeledTerm> terms);

// Lazily evaluated phi(x) for the nodes of one batch; each node is embedded
// at most once per tape.
class NodeEmbeddings {
 public:
  // Row k of `inputs` holds the raw features of batch node k.
  NodeEmbeddings(const ParamVars& params, const Matrix& inputs);
  // Embeddings supplied directly, e.g. as free leaves in gradient checks.
  explicit NodeEmbeddings(std::vector<ad::Var> fixed);

  ad::Var at(std::size_t node);
  std::size_t size() const { return cache_.size(); }
  // Nodes whose embedding has been requested so far.
  std::vector<std::size_t> touched() const;

 private:
  const ParamVars* params_ = nullptr;
  const Matrix* inputs_ = nullptr;
  std::vector<ad::Var> cache_;
};

struct WalkLoss {
  Direction direction = Direction::SourceToTarget;
  bool reached = false;
  std::size_t length = 0;
  double l1 = 0.0;
  // Contributions after gating; l2 is 0 when not evaluated.
  double l2 = 0.0;
  double l3 = 0.0;
};

struct LossReport {
  double l1_total = 0.0;
  double l2_total = 0.0;
  double l3_total = 0.0;
  double objective = 0.0;
  std::size_t walks_s2t = 0;
  std::size_t walks_t2s = 0;
  std::size_t reached_s2t = 0;
  std::size_t reached_t2s = 0;
  std::vector<WalkLoss> walks;
  // Batch nodes whose label entered a cross-entropy term, once per use.
  std::vector<std::size_t> labeled_nodes;
  // Instance weight of each labeled_nodes entry.
  std::vector<double> weights;

  std::size_t walks_total() const { return walks_s2t + walks_t2s; }
  std::size_t walks_reached() const { return reached_s2t + reached_t2s; }
};

struct ObjectiveResult {
  ad::Var total;
  LossReport report;
};

// Domain and optional label of every batch node, indexed like the graph.
struct NodeInfo {
  std::span<const Domain> domains;
  std::span<const std::optional<int>> labels;
};

ObjectiveResult objective(std::span<const WalkSequence> walks, const NodeInfo& nodes,
                          NodeEmbeddings& embeddings, const ParamVars& params,
                          const LossSettings& settings);

}  // namespace derwent
