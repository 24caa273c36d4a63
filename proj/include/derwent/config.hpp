#pragma once

// Run configuration for the command-line front end.
//
// Sources are layered as defaults < key=value file < DERWENT_SEED < flags.
// The file format is one `key = value` pair per line; `#` starts a comment.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "derwent/data.hpp"
#include "derwent/sweep.hpp"
#include "derwent/trainer.hpp"

namespace derwent {

enum class Command { Train, Baseline, Eval, Paths, Sweep };

std::string_view to_string(Command c);
std::optional<Command> parse_command(std::string_view text);

struct RunConfig {
  Command command = Command::Train;
  TrainConfig train;
  // CSV dataset; when empty the synthetic chain described by `chain` is used.
  std::string dataset;
  ChainOptions chain;
  std::string output_dir = "derwent_run";
  std::string checkpoint;
  SweepAxis sweep_axis = SweepAxis::Theta;
  std::vector<double> sweep_values;
  std::size_t sweep_seeds = 3;
  // Writes both graphs of the first step as CSV.
  bool dump_graph = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

using Override = std::pair<std::string, std::string>;

// Applies `file_text`, then `env_seed` (the DERWENT_SEED value, if set), then
// `flags`. Unknown keys, malformed values and failed validation raise
// ConfigError. lr_classifier follows 10 * lr_feature unless given.
RunConfig parse_config(std::string_view file_text, const std::vector<Override>& flags = {},
                       const char* env_seed = nullptr);

// Every key with its current value, in a form parse_config reads back to an
// equal RunConfig. The command itself is written as a comment.
std::string config_snapshot(const RunConfig& config);

// Throws ConfigError for invalid combinations (e.g. eval without a
// checkpoint, a sweep with fewer than two values).
void validate(const RunConfig& config);

}  // namespace derwent
