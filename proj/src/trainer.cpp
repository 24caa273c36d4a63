#include "derwent/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "derwent/batch_graph.hpp"

namespace derwent {
namespace {

constexpr std::uint64_t kInitStream = 0x1417;

std::uint64_t batch_seed(std::uint64_t seed, int epoch, int step) {
  return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(epoch) + 1),
                     static_cast<std::uint64_t>(step));
}

void draw(std::span<const Instance> pool, std::size_t quota, Rng& rng,
          std::vector<const Instance*>& out) {
  if (quota == 0) return;
  if (pool.empty()) throw ConfigError("make_minibatch: empty pool with a non-zero quota");
  if (pool.size() >= quota) {
    // Partial Fisher-Yates over indices.
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < quota; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      out.push_back(&pool[idx[i]]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t i = 0; i < quota; ++i) out.push_back(&pool[pick(rng)]);
  }
}

std::unordered_set<std::int64_t> ids_of(std::span<const Instance> pool) {
  std::unordered_set<std::int64_t> ids;
  for (const Instance& inst : pool) ids.insert(inst.id);
  return ids;
}

struct StepOutput {
  LossReport report;
  std::vector<PathRecord> walks;
};

class DerwentStep {
 public:
  DerwentStep(const TrainConfig& config, const Datasets& data)
      : config_(config), data_(data), test_ids_(ids_of(data.target_test)) {
    settings_.alpha = config.alpha;
    settings_.lambda1 = config.ablate_lstm ? 0.0 : config.lambda1;
    settings_.lambda2 = config.lambda2;
    settings_.reconstruction = !config.ablate_lstm;
  }

  // With `update` false only the batch, graphs and walks are produced.
  StepOutput run(TrainState& state, int epoch, int step, bool keep_walks, bool update,
                 const TrainHooks& hooks) const {
    const std::uint64_t seed = batch_seed(config_.seed, epoch, step);
    Rng rng(seed);
    const MiniBatch batch = make_minibatch(data_.source, data_.target_train, data_.auxiliary,
                                           config_.batch, rng);
    const std::size_t n = batch.members.size();
    std::vector<GraphNode> nodes(n);
    std::vector<Domain> domains(n);
    std::vector<std::optional<int>> labels(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Instance& inst = *batch.members[k];
      if (test_ids_.count(inst.id)) {
        throw Error("train: test instance " + std::to_string(inst.id) + " drawn into a batch");
      }
      if (inst.domain == Domain::Auxiliary && inst.label.has_value()) {
        throw Error("train: labeled auxiliary instance " + std::to_string(inst.id));
      }
      nodes[k] = GraphNode{inst.id, inst.domain};
      domains[k] = inst.domain;
      labels[k] = inst.label;
    }
    const Matrix inputs = feature_matrix(batch.members);
    const Matrix embedded = embed_rows(state.params, inputs);

    const double eta = eta_schedule(epoch, config_.eta0);
    const BatchGraph forward = BatchGraph::build(nodes, embedded, 1.0, eta);
    const BatchGraph backward = BatchGraph::build(nodes, embedded, eta, 1.0);
    BatchTrace trace;
    trace.epoch = epoch;
    trace.step = step;
    for (const Instance* inst : batch.members) trace.batch_ids.push_back(inst->id);
    if (hooks.on_graphs) hooks.on_graphs(trace, forward, backward);
    std::vector<WalkSequence> walks = sample_batch_walks(
        forward, Direction::SourceToTarget, config_.theta, derive_seed(seed, 1));
    const std::size_t n_forward = walks.size();
    std::vector<WalkSequence> back = sample_batch_walks(
        backward, Direction::TargetToSource, config_.theta, derive_seed(seed, 2));
    walks.insert(walks.end(), std::make_move_iterator(back.begin()),
                 std::make_move_iterator(back.end()));

    StepOutput out;
    if (keep_walks) {
      for (std::size_t w = 0; w < walks.size(); ++w) {
        out.walks.push_back(to_record(w < n_forward ? forward : backward, walks[w], epoch));
      }
    }
    if (!update) return out;

    ad::Tape tape;
    const ParamVars vars = bind(tape, state.params);
    NodeEmbeddings embeddings(vars, inputs);
    const NodeInfo info{domains, labels};
    ObjectiveResult result = objective(walks, info, embeddings, vars, settings_);
    tape.backward(result.total);
    sgd_nesterov_step(state.params, gradients(vars), state.optimizer, config_.lr_feature,
                      config_.lr_classifier, config_.momentum);

    if (hooks.on_batch) {
      for (std::size_t v : result.report.labeled_nodes) {
        trace.labeled_ids.push_back(batch.members[v]->id);
      }
      hooks.on_batch(trace);
    }
    out.report = std::move(result.report);
    return out;
  }

 private:
  const TrainConfig& config_;
  const Datasets& data_;
  std::unordered_set<std::int64_t> test_ids_;
  LossSettings settings_;
};

}  // namespace

void validate(const TrainConfig& c) {
  if (!(c.lr_feature > 0.0) || !(c.lr_classifier > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(c.momentum >= 0.0) || !(c.momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (c.theta < 2) throw ConfigError("theta must be >= 2");
  if (!(c.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(c.eta0 > 0.0)) throw ConfigError("eta0 must be positive");
  if (!(c.lambda1 >= 0.0) || !(c.lambda2 >= 0.0)) {
    throw ConfigError("lambda1 and lambda2 must be non-negative");
  }
  if (c.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (c.batch.source == 0 || c.batch.target == 0) {
    throw ConfigError("source and target batch quotas must be positive");
  }
  if (c.labeled_target_per_class == 0) {
    throw ConfigError("labeled_target_per_class must be positive");
  }
}

MiniBatch make_minibatch(std::span<const Instance> source, std::span<const Instance> target,
                         std::span<const Instance> auxiliary, const BatchSizes& sizes,
                         Rng& rng) {
  MiniBatch b;
  b.members.reserve(sizes.total());
  draw(source, sizes.source, rng, b.members);
  draw(target, sizes.target, rng, b.members);
  draw(auxiliary, sizes.auxiliary, rng, b.members);
  b.source = sizes.source;
  b.target = sizes.target;
  b.auxiliary = sizes.auxiliary;
  return b;
}

std::size_t steps_per_epoch(const TrainConfig& config, const Datasets& data) {
  const std::size_t q = config.batch.source;
  return (data.source.size() + q - 1) / q;
}

TrainState initial_state(const TrainConfig& config, std::size_t d_in) {
  TrainState s;
  s.params = init_params(derive_seed(config.seed, kInitStream), d_in);
  s.optimizer = make_optimizer_state(s.params);
  s.epoch = 0;
  return s;
}

TrainResult train(const TrainConfig& config, const Datasets& data, const TrainHooks& hooks,
                  const TrainState* resume) {
  validate(config);
  validate(data);
  if (data.source.empty()) throw ConfigError("train: empty source pool");
  if (data.target_test.empty()) throw ConfigError("train: empty target test set");
  TrainResult result;
  result.state = resume ? *resume : initial_state(config, data.d_in);
  if (result.state.params.dims.d_in != data.d_in) {
    throw DimensionError("train: parameters expect d_in " +
                         std::to_string(result.state.params.dims.d_in));
  }
  const int steps = static_cast<int>(steps_per_epoch(config, data));
  const DerwentStep stepper(config, data);

  for (int epoch = result.state.epoch; epoch < config.epochs; ++epoch) {
    const bool last_epoch = epoch + 1 == config.epochs;
    for (int step = 0; step < steps; ++step) {
      const std::size_t global = static_cast<std::size_t>(epoch) * steps + step;
      StepOutput out;
      try {
        out = stepper.run(result.state, epoch, step, last_epoch, true, hooks);
      } catch (const TrainingError&) {
        throw;
      } catch (const NumericError& e) {
        throw TrainingError(global, e.what());
      }
      MetricsRow row;
      row.epoch = epoch;
      row.step = step;
      row.l1 = out.report.l1_total;
      row.l2 = out.report.l2_total;
      row.l3 = out.report.l3_total;
      row.objective = out.report.objective;
      row.walks_reached_s2t = out.report.reached_s2t;
      row.walks_reached_t2s = out.report.reached_t2s;
      if (step + 1 == steps) row.target_test_acc = evaluate(result.state.params, data.target_test);
      result.history.push_back(row);
      if (last_epoch) {
        result.final_walks.insert(result.final_walks.end(), out.walks.begin(), out.walks.end());
      }
    }
    result.state.epoch = epoch + 1;
  }
  return result;
}

double evaluate(const ParameterSet& params, std::span<const Instance> test) {
  if (test.empty()) throw ConfigError("evaluate: empty test set");
  std::vector<const Instance*> rows;
  rows.reserve(test.size());
  for (const Instance& inst : test) {
    if (!inst.label.has_value()) throw ConfigError("evaluate: unlabeled test instance");
    rows.push_back(&inst);
  }
  const Matrix embedded = embed_rows(params, feature_matrix(rows));
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  std::int64_t correct = 0;
#pragma omp parallel for reduction(+ : correct) schedule(static) if (n >= 512)
  for (std::int64_t i = 0; i < n; ++i) {
    const int predicted = classify(params, embedded.row_span(i)) >= 0.0 ? 1 : 0;
    if (predicted == *rows[i]->label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

std::vector<PathRecord> collect_walks(const TrainConfig& config, const Datasets& data,
                                      const ParameterSet& params, int epoch) {
  validate(config);
  validate(data);
  if (epoch < 0) throw ConfigError("collect_walks: epoch must be >= 0");
  if (params.dims.d_in != data.d_in) {
    throw DimensionError("collect_walks: parameters expect d_in " +
                         std::to_string(params.dims.d_in));
  }
  TrainState state;
  state.params = params;
  const DerwentStep stepper(config, data);
  const int steps = static_cast<int>(steps_per_epoch(config, data));
  std::vector<PathRecord> out;
  for (int step = 0; step < steps; ++step) {
    StepOutput s = stepper.run(state, epoch, step, true, false, {});
    out.insert(out.end(), s.walks.begin(), s.walks.end());
  }
  return out;
}

BaselineResult baseline_dnn(const TrainConfig& config, const Datasets& data,
                            const TrainHooks& hooks) {
  validate(config);
  validate(data);
  if (data.target_train.empty()) throw ConfigError("baseline: empty target training pool");
  if (data.target_test.empty()) throw ConfigError("baseline: empty target test set");
  BaselineResult result;
  result.state = initial_state(config, data.d_in);
  const int steps = static_cast<int>(steps_per_epoch(config, data));
  BatchSizes sizes;
  sizes.source = 0;
  sizes.auxiliary = 0;
  sizes.target = config.batch.target;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int step = 0; step < steps; ++step) {
      const std::size_t global = static_cast<std::size_t>(epoch) * steps + step;
      Rng rng(batch_seed(config.seed, epoch, step));
      const MiniBatch batch = make_minibatch({}, data.target_train, {}, sizes, rng);
      MetricsRow row;
      try {
        ad::Tape tape;
        const ParamVars vars = bind(tape, result.state.params);
        std::vector<LabeledTerm> terms;
        for (const Instance* inst : batch.members) {
          const ad::Var x = tape.constant(Matrix::row(inst->features));
          terms.push_back(LabeledTerm{net::feature_extract(vars, x), *inst->label, 1.0});
        }
        const ad::Var loss = classification_loss(tape, vars, terms);
        tape.backward(loss);
        sgd_nesterov_step(result.state.params, gradients(vars), result.state.optimizer,
                          config.lr_feature, config.lr_classifier, config.momentum);
        row.l3 = loss.item();
        row.objective = row.l3;
      } catch (const NumericError& e) {
        throw TrainingError(global, e.what());
      }
      if (hooks.on_batch) {
        BatchTrace trace;
        trace.epoch = epoch;
        trace.step = step;
        for (const Instance* inst : batch.members) {
          trace.batch_ids.push_back(inst->id);
          trace.labeled_ids.push_back(inst->id);
        }
        hooks.on_batch(trace);
      }
      row.epoch = epoch;
      row.step = step;
      if (step + 1 == steps) row.target_test_acc = evaluate(result.state.params, data.target_test);
      result.history.push_back(row);
    }
    result.state.epoch = epoch + 1;
  }
  result.accuracy = evaluate(result.state.params, data.target_test);
  return result;
}

}  // namespace derwent
