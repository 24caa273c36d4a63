#include "derwent/run.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "derwent/checkpoint.hpp"
#include "derwent/dataset_io.hpp"
#include "derwent/error.hpp"
#include "derwent/sweep.hpp"

namespace derwent {
namespace {

namespace fs = std::filesystem;

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text, std::ostream& log) {
  std::ofstream out = open_output(path);
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
  log << "wrote " << path.string() << '\n';
}

fs::path prepare_dir(const std::string& dir) {
  const fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) throw ConfigError("cannot create output directory " + dir);
  return path;
}

void write_metrics(const fs::path& path, const std::vector<MetricsRow>& history,
                   std::ostream& log) {
  std::ofstream out = open_output(path);
  write_metrics_csv(out, history);
  if (!out) throw ConfigError("failed writing " + path.string());
  log << "wrote " << path.string() << '\n';
}

void write_state(const fs::path& path, const TrainState& state, std::ostream& log) {
  save_checkpoint(path, state);
  log << "wrote " << path.string() << '\n';
}

void check_dims(const TrainState& state, const Datasets& data) {
  if (state.params.dims.d_in != data.d_in) {
    throw ConfigError("checkpoint input width " + std::to_string(state.params.dims.d_in) +
                      " does not match the dataset width " + std::to_string(data.d_in));
  }
}

RunSummary run_train(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const Datasets data = load_run_data(config);
  TrainState resume;
  const bool resuming = !config.checkpoint.empty();
  if (resuming) {
    resume = load_checkpoint(config.checkpoint);
    check_dims(resume, data);
  }
  TrainHooks hooks;
  bool dumped = false;
  if (config.dump_graph) {
    hooks.on_graphs = [&](const BatchTrace&, const BatchGraph& forward,
                          const BatchGraph& backward) {
      if (dumped) return;
      dumped = true;
      for (const auto& [name, graph] :
           {std::pair{"graph_forward.csv", &forward}, std::pair{"graph_backward.csv", &backward}}) {
        std::ofstream out = open_output(dir / name);
        graph->write_csv(out);
        log << "wrote " << (dir / name).string() << '\n';
      }
    };
  }
  const TrainResult result = train(config.train, data, hooks, resuming ? &resume : nullptr);
  write_metrics(dir / "metrics.csv", result.history, log);
  write_state(dir / "checkpoint.drwt", result.state, log);
  std::ofstream walks = open_output(dir / "walks.txt");
  write_walk_dump(walks, result.final_walks);
  log << "wrote " << (dir / "walks.txt").string() << '\n';
  RunSummary summary;
  summary.accuracy = evaluate(result.state.params, data.target_test);
  write_text(dir / "accuracy.txt", format_real(summary.accuracy) + "\n", log);
  return summary;
}

RunSummary run_baseline(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const Datasets data = load_run_data(config);
  const BaselineResult result = baseline_dnn(config.train, data);
  write_metrics(dir / "metrics.csv", result.history, log);
  write_state(dir / "checkpoint.drwt", result.state, log);
  RunSummary summary;
  summary.accuracy = result.accuracy;
  write_text(dir / "accuracy.txt", format_real(summary.accuracy) + "\n", log);
  return summary;
}

RunSummary run_eval(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const Datasets data = load_run_data(config);
  const TrainState state = load_checkpoint(config.checkpoint);
  check_dims(state, data);
  RunSummary summary;
  summary.accuracy = evaluate(state.params, data.target_test);
  write_text(dir / "accuracy.txt", format_real(summary.accuracy) + "\n", log);
  return summary;
}

RunSummary run_paths(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const Datasets data = load_run_data(config);
  const TrainState state = load_checkpoint(config.checkpoint);
  check_dims(state, data);
  // The walks of the last completed epoch, under the saved parameters.
  const int epoch = state.epoch > 0 ? state.epoch - 1 : 0;
  const std::vector<PathRecord> walks = collect_walks(config.train, data, state.params, epoch);
  const PathExport exported = export_paths(walks, instance_meta(data), dir / "paths");
  log << "wrote " << (dir / "paths.json").string() << " and " << (dir / "paths.svg").string()
      << " (" << exported.exported << " walks)\n";
  if (exported.warning) log << "warning: no walk reached its destination domain\n";
  RunSummary summary;
  summary.warning = exported.warning;
  return summary;
}

RunSummary run_sweep_command(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const SweepData data = [&](std::size_t replicate, std::size_t labeled) {
    RunConfig c = config;
    c.train.labeled_target_per_class = labeled;
    c.chain.labeled_target_per_class = labeled;
    return load_run_data(c, replicate);
  };
  std::size_t index = 0;
  const auto on_run = [&](const SweepRun& run) {
    // Each run directory is a self-contained train run.
    RunConfig c = config;
    c.command = Command::Train;
    c.train = run.config;
    c.chain.labeled_target_per_class = run.config.labeled_target_per_class;
    if (config.dataset.empty()) c.chain.seed = config.chain.seed + run.replicate;
    c.checkpoint.clear();
    c.sweep_values.clear();
    const fs::path run_dir = dir / ("run_" + std::to_string(index++ / config.sweep_seeds) + "_" +
                                    std::to_string(run.replicate));
    c.output_dir = run_dir.string();
    prepare_dir(c.output_dir);
    write_text(run_dir / "config.txt", config_snapshot(c), log);
    write_metrics(run_dir / "metrics.csv", run.result.history, log);
    write_state(run_dir / "checkpoint.drwt", run.result.state, log);
    write_text(run_dir / "accuracy.txt", format_real(run.accuracy) + "\n", log);
  };
  const std::vector<SweepRow> rows = run_sweep(config.train, config.sweep_axis,
                                               config.sweep_values, config.sweep_seeds, data, on_run);
  std::ofstream out = open_output(dir / "sweep.csv");
  write_sweep_csv(out, rows);
  if (!out) throw ConfigError("failed writing sweep.csv");
  log << "wrote " << (dir / "sweep.csv").string() << '\n';
  return {};
}

}  // namespace

Datasets load_run_data(const RunConfig& config, std::size_t replicate) {
  if (!config.dataset.empty()) {
    return load_dataset(config.dataset, config.train.labeled_target_per_class);
  }
  ChainOptions chain = config.chain;
  chain.labeled_target_per_class = config.train.labeled_target_per_class;
  chain.seed += replicate;
  return gen_synthetic_chain(chain);
}

InstanceMeta instance_meta(const Datasets& data) {
  InstanceMeta meta;
  for (const auto* pool : {&data.source, &data.auxiliary, &data.target_train, &data.target_test}) {
    for (const Instance& inst : *pool) {
      if (inst.meta) meta[inst.id] = *inst.meta;
    }
  }
  return meta;
}

RunSummary execute(const RunConfig& config, std::ostream& log) {
  validate(config);
  const fs::path dir = prepare_dir(config.output_dir);
  write_text(dir / "config.txt", config_snapshot(config), log);
  RunSummary summary;
  switch (config.command) {
    case Command::Train:
      summary = run_train(config, dir, log);
      break;
    case Command::Baseline:
      summary = run_baseline(config, dir, log);
      break;
    case Command::Eval:
      summary = run_eval(config, dir, log);
      break;
    case Command::Paths:
      summary = run_paths(config, dir, log);
      break;
    case Command::Sweep:
      summary = run_sweep_command(config, dir, log);
      break;
  }
  summary.output_dir = dir;
  if (summary.accuracy >= 0.0) log << "target test accuracy " << format_real(summary.accuracy) << '\n';
  return summary;
}

}  // namespace derwent
