#pragma once

// Dataset files and the per-step metrics table.
//
// Dataset format: a header line `d_in,n`, then n rows
// `id,domain,label,f_1,...,f_{d_in}` with domain one of source / auxiliary /
// target and an empty label for auxiliary rows. Target rows are split into
// the labeled training pool and the test set by split_target.

#include <filesystem>
#include <iosfwd>
#include <span>

#include "derwent/data.hpp"
#include "derwent/trainer.hpp"

namespace derwent {

// Throws FormatError on malformed input and ConfigError when the split or
// validation fails.
Datasets read_dataset(std::istream& in, std::size_t labeled_target_per_class);
Datasets load_dataset(const std::filesystem::path& path, std::size_t labeled_target_per_class);

// Writes source, auxiliary, target_train and target_test in that order, so
// reading back with the same per-class count reproduces the split.
void write_dataset(std::ostream& out, const Datasets& data);

// Header `epoch,step,l1,l2,l3,objective,walks_reached_s2t,walks_reached_t2s,
// target_test_acc`; the accuracy cell is empty on steps without evaluation.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);

}  // namespace derwent
