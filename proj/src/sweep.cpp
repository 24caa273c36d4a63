#include "derwent/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>

#include "derwent/error.hpp"

namespace derwent {

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Theta:
      return "theta";
    case SweepAxis::Alpha:
      return "alpha";
    case SweepAxis::LabeledTarget:
      return "labeled_target";
  }
  return "?";
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view text) {
  for (SweepAxis a : {SweepAxis::Theta, SweepAxis::Alpha, SweepAxis::LabeledTarget}) {
    if (text == to_string(a)) return a;
  }
  return std::nullopt;
}

TrainConfig apply_axis(const TrainConfig& base, SweepAxis axis, double value) {
  TrainConfig c = base;
  switch (axis) {
    case SweepAxis::Theta:
      c.theta = static_cast<int>(std::lround(value));
      break;
    case SweepAxis::Alpha:
      c.alpha = value;
      break;
    case SweepAxis::LabeledTarget:
      c.labeled_target_per_class = static_cast<std::size_t>(std::llround(value));
      break;
  }
  validate(c);
  return c;
}

std::vector<SweepRow> run_sweep(const TrainConfig& base, SweepAxis axis,
                                std::span<const double> values, std::size_t replicates,
                                const SweepData& data,
                                const std::function<void(const SweepRun&)>& on_run) {
  if (values.size() < 2) throw ConfigError("sweep: need at least two values");
  if (replicates == 0) throw ConfigError("sweep: need at least one replicate");
  std::vector<SweepRun> runs;
  for (double v : values) {
    for (std::size_t k = 0; k < replicates; ++k) {
      SweepRun run;
      run.value = v;
      run.replicate = k;
      run.config = apply_axis(base, axis, v);
      run.config.seed = base.seed + k;
      runs.push_back(std::move(run));
    }
  }
  const std::int64_t n = static_cast<std::int64_t>(runs.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      SweepRun& run = runs[i];
      const Datasets d = data(run.replicate, run.config.labeled_target_per_class);
      run.result = train(run.config, d);
      run.accuracy = evaluate(run.result.state.params, d.target_test);
    } catch (...) {
#pragma omp critical(derwent_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SweepRow> rows;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    SweepRow row;
    row.value = values[vi];
    double total = 0.0;
    for (std::size_t k = 0; k < replicates; ++k) {
      const double acc = runs[vi * replicates + k].accuracy;
      row.accuracies.push_back(acc);
      total += acc;
    }
    row.mean_accuracy = total / static_cast<double>(replicates);
    rows.push_back(std::move(row));
  }
  if (on_run) {
    for (const SweepRun& run : runs) on_run(run);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  const std::size_t k = rows.empty() ? 0 : rows.front().accuracies.size();
  out << "value,mean_accuracy";
  for (std::size_t i = 1; i <= k; ++i) out << ",acc_" << i;
  out << '\n';
  char buf[32];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out << buf;
    std::snprintf(buf, sizeof buf, "%.17g", r.mean_accuracy);
    out << ',' << buf;
    for (double a : r.accuracies) {
      std::snprintf(buf, sizeof buf, "%.17g", a);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace derwent
