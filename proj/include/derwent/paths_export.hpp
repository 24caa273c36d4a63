#pragma once

// Transfer-path artifacts: a JSON list of walk records and an SVG with one
// horizontal strip per walk.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "derwent/walker.hpp"

namespace derwent {

// Optional per-instance annotation, e.g. the synthetic chain angle (radians).
using InstanceMeta = std::map<std::int64_t, double>;

std::string paths_to_json(std::span<const PathRecord> records, const InstanceMeta& meta = {});
// Inverse of paths_to_json; annotations are ignored. Throws FormatError.
std::vector<PathRecord> paths_from_json(const std::string& text);

// Source nodes are outlined red, target nodes green, auxiliary nodes grey.
// Each glyph carries its domain tag and, when `meta` has the instance, the
// angle in degrees. Output bytes depend only on the input.
std::string paths_to_svg(std::span<const PathRecord> records, const InstanceMeta& meta = {});

struct PathExport {
  std::size_t exported = 0;
  // True when there was no reached walk to export.
  bool warning = false;
};

// Writes the reached walks among `records` (at most `max_paths`, in order)
// to <stem>.json and <stem>.svg.
PathExport export_paths(std::span<const PathRecord> records, const InstanceMeta& meta,
                        const std::filesystem::path& stem, std::size_t max_paths = 50);

}  // namespace derwent
