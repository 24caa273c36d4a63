#include "derwent/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "derwent/error.hpp"

namespace derwent {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  while (true) {
    const auto comma = line.find(',');
    cells.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cells;
}

template <typename T>
T parse_cell(std::string_view cell, std::size_t line_no, const char* what) {
  T out{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError("dataset line " + std::to_string(line_no) + ": bad " + what + " '" +
                      std::string(cell) + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_rows(std::ostream& out, const std::vector<Instance>& pool) {
  for (const Instance& inst : pool) {
    std::string domain(to_string(inst.domain));
    domain[0] = static_cast<char>(domain[0] - 'A' + 'a');
    out << inst.id << ',' << domain << ',';
    if (inst.label) out << *inst.label;
    for (double f : inst.features) out << ',' << format_double(f);
    out << '\n';
  }
}

}  // namespace

Datasets read_dataset(std::istream& in, std::size_t labeled_target_per_class) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw FormatError("dataset: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() != 2) throw FormatError("dataset: header must be 'd_in,n'");
  const auto d_in = parse_cell<std::size_t>(header[0], line_no, "d_in");
  const auto n = parse_cell<std::size_t>(header[1], line_no, "row count");
  if (d_in == 0) throw FormatError("dataset: d_in must be >= 1");

  Datasets data;
  data.d_in = d_in;
  std::vector<Instance> target;
  for (std::size_t r = 0; r < n; ++r) {
    ++line_no;
    if (!std::getline(in, line)) {
      throw FormatError("dataset: expected " + std::to_string(n) + " rows, found " +
                        std::to_string(r));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cells = split_commas(line);
    if (cells.size() != 3 + d_in) {
      throw FormatError("dataset line " + std::to_string(line_no) + ": expected " +
                        std::to_string(3 + d_in) + " fields, found " +
                        std::to_string(cells.size()));
    }
    Instance inst;
    inst.id = parse_cell<std::int64_t>(cells[0], line_no, "id");
    const auto domain = parse_domain(cells[1]);
    if (!domain) {
      throw FormatError("dataset line " + std::to_string(line_no) + ": unknown domain '" +
                        std::string(cells[1]) + "'");
    }
    inst.domain = *domain;
    if (!cells[2].empty()) inst.label = parse_cell<int>(cells[2], line_no, "label");
    inst.features.reserve(d_in);
    for (std::size_t k = 0; k < d_in; ++k) {
      inst.features.push_back(parse_cell<double>(cells[3 + k], line_no, "feature"));
    }
    switch (inst.domain) {
      case Domain::Source:
        data.source.push_back(std::move(inst));
        break;
      case Domain::Auxiliary:
        data.auxiliary.push_back(std::move(inst));
        break;
      case Domain::Target:
        target.push_back(std::move(inst));
        break;
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw FormatError("dataset line " + std::to_string(line_no) + ": rows beyond the declared " +
                        std::to_string(n));
    }
  }
  split_target(std::move(target), labeled_target_per_class, data.target_train, data.target_test);
  validate(data);
  return data;
}

Datasets load_dataset(const std::filesystem::path& path, std::size_t labeled_target_per_class) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  return read_dataset(in, labeled_target_per_class);
}

void write_dataset(std::ostream& out, const Datasets& data) {
  const std::size_t n = data.source.size() + data.auxiliary.size() + data.target_train.size() +
                        data.target_test.size();
  out << data.d_in << ',' << n << '\n';
  write_rows(out, data.source);
  write_rows(out, data.auxiliary);
  write_rows(out, data.target_train);
  write_rows(out, data.target_test);
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << "epoch,step,l1,l2,l3,objective,walks_reached_s2t,walks_reached_t2s,target_test_acc\n";
  for (const MetricsRow& r : rows) {
    out << r.epoch << ',' << r.step << ',' << format_double(r.l1) << ',' << format_double(r.l2)
        << ',' << format_double(r.l3) << ',' << format_double(r.objective) << ','
        << r.walks_reached_s2t << ',' << r.walks_reached_t2s << ',';
    if (r.target_test_acc) out << format_double(*r.target_test_acc);
    out << '\n';
  }
}

}  // namespace derwent
