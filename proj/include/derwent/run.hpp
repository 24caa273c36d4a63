#pragma once
// Executes one configured command and writes its artifacts.
//
// Every command writes config.txt to the output directory. train and
// baseline add metrics.csv, checkpoint.drwt and accuracy.txt; train also
// writes walks.txt (final-epoch walks) and, with dump_graph, the two graphs
// of its first step. eval writes accuracy.txt, paths writes paths.json and
// paths.svg, and sweep writes sweep.csv plus one train directory per run.
#include <cstddef>
#include <filesystem>
#include <iosfwd>

#include "derwent/config.hpp"
#include "derwent/paths_export.hpp"

namespace derwent {

// The configured dataset file, or the synthetic chain with its data seed
// advanced by `replicate`.
Datasets load_run_data(const RunConfig& config, std::size_t replicate = 0);

// Per-instance meta values (the chain angle for synthetic data).
InstanceMeta instance_meta(const Datasets& data);

struct RunSummary {
  std::filesystem::path output_dir;
  // Target test accuracy of the final parameters, when the command has one.
  double accuracy = -1.0;
  // Set by paths when there was no reached walk to export.
  bool warning = false;
};

// Validates `config`, runs it and logs one line per artifact to `log`.
RunSummary execute(const RunConfig& config, std::ostream& log);

}  // namespace derwent
