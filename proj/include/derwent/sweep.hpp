#pragma once

// One-axis sensitivity sweeps: a full train + evaluate for every
// (value, seed) pair, summarised per value.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "derwent/data.hpp"
#include "derwent/trainer.hpp"

namespace derwent {

enum class SweepAxis { Theta, Alpha, LabeledTarget };

std::string_view to_string(SweepAxis a);
std::optional<SweepAxis> parse_sweep_axis(std::string_view text);

// Data for run `replicate` (0-based) with the given labeled count per class.
using SweepData = std::function<Datasets(std::size_t replicate, std::size_t labeled_per_class)>;

struct SweepRun {
  double value = 0.0;
  std::size_t replicate = 0;
  TrainConfig config;
  TrainResult result;
  double accuracy = 0.0;
};

struct SweepRow {
  double value = 0.0;
  double mean_accuracy = 0.0;
  // One entry per replicate, in replicate order.
  std::vector<double> accuracies;
};

// `base` with the axis set to `value`.
TrainConfig apply_axis(const TrainConfig& base, SweepAxis axis, double value);

// Replicate k trains with seed base.seed + k. Runs are independent and may
// execute concurrently; `on_run` is called serially in (value, replicate)
// order after all runs finish.
std::vector<SweepRow> run_sweep(const TrainConfig& base, SweepAxis axis,
                                std::span<const double> values, std::size_t replicates,
                                const SweepData& data,
                                const std::function<void(const SweepRun&)>& on_run = {});

// Header `value,mean_accuracy,acc_1,...,acc_k`.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace derwent
