#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "derwent/data.hpp"
#include "derwent/error.hpp"
#include "derwent/losses.hpp"
#include "derwent/nets.hpp"
#include "derwent/optimizer.hpp"
#include "derwent/walker.hpp"

namespace derwent {

struct BatchSizes {
  std::size_t source = 10;
  std::size_t target = 8;
  std::size_t auxiliary = 110;

  std::size_t total() const { return source + target + auxiliary; }
  friend bool operator==(const BatchSizes&, const BatchSizes&) = default;
};

struct TrainConfig {
  double lr_feature = 1e-3;
  double lr_classifier = 1e-2;
  double momentum = 0.9;
  BatchSizes batch;
  int theta = 10;
  double alpha = 3.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  // Initial graph temperature; see eta_schedule.
  double eta0 = 1.1;
  int epochs = 10;
  std::uint64_t seed = 0;
  bool ablate_lstm = false;
  std::size_t labeled_target_per_class = 10;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Throws ConfigError for non-positive rates, theta < 2, empty quotas, etc.
void validate(const TrainConfig& config);

// Source members first, then target, then auxiliary.
struct MiniBatch {
  std::vector<const Instance*> members;
  std::size_t source = 0;
  std::size_t target = 0;
  std::size_t auxiliary = 0;
};

// Draws each domain's quota without replacement, or with replacement when
// the pool is smaller than the quota. Throws ConfigError on an empty pool
// with a non-zero quota.
MiniBatch make_minibatch(std::span<const Instance> source, std::span<const Instance> target,
                         std::span<const Instance> auxiliary, const BatchSizes& sizes,
                         Rng& rng);

struct MetricsRow {
  int epoch = 0;
  int step = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double objective = 0.0;
  std::size_t walks_reached_s2t = 0;
  std::size_t walks_reached_t2s = 0;
  // Filled on the last step of each epoch.
  std::optional<double> target_test_acc;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

// Ids seen by one optimisation step; lets callers audit what reached a loss.
struct BatchTrace {
  int epoch = 0;
  int step = 0;
  std::vector<std::int64_t> batch_ids;
  // Instances whose label entered a cross-entropy term.
  std::vector<std::int64_t> labeled_ids;
};

struct TrainHooks {
  std::function<void(const BatchTrace&)> on_batch;
  // Both graphs of every step, before any walk is sampled.
  std::function<void(const BatchTrace&, const BatchGraph& forward, const BatchGraph& backward)>
      on_graphs;
};

// Parameters and optimiser state at an epoch boundary.
struct TrainState {
  ParameterSet params;
  OptimizerState optimizer;
  // Number of epochs already completed.
  int epoch = 0;
};

struct TrainResult {
  TrainState state;
  std::vector<MetricsRow> history;
  // Every walk sampled during the final epoch, both directions.
  std::vector<PathRecord> final_walks;
};

// Raised when a step fails numerically; carries the global step index.
class TrainingError : public NumericError {
 public:
  TrainingError(std::size_t step, const std::string& what)
      : NumericError("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// Mini-batches per epoch: ceil(|source| / batch.source).
std::size_t steps_per_epoch(const TrainConfig& config, const Datasets& data);

TrainState initial_state(const TrainConfig& config, std::size_t d_in);

// Runs epochs [resume.epoch, config.epochs). Deterministic in config.seed; the
// randomness of a step depends only on (seed, epoch, step), so resuming from
// a saved TrainState reproduces an uninterrupted run.
TrainResult train(const TrainConfig& config, const Datasets& data, const TrainHooks& hooks = {},
                  const TrainState* resume = nullptr);

// Fraction of instances whose thresholded sigmoid(f_c(phi(x))) matches the
// label. Throws ConfigError on an empty set.
double evaluate(const ParameterSet& params, std::span<const Instance> test);

// Walks of every step of `epoch` under fixed parameters, drawn from the same
// random streams training would use for that epoch. No update is made.
std::vector<PathRecord> collect_walks(const TrainConfig& config, const Datasets& data,
                                      const ParameterSet& params, int epoch);

struct BaselineResult {
  TrainState state;
  std::vector<MetricsRow> history;
  double accuracy = 0.0;
};

// phi + f_c trained with plain cross-entropy on the labeled target pool
// only, with the same optimiser, step count and batch.target draws per step.
BaselineResult baseline_dnn(const TrainConfig& config, const Datasets& data,
                            const TrainHooks& hooks = {});

}  // namespace derwent
