#include "derwent/paths_export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "derwent/error.hpp"
#include "json.hpp"

namespace derwent {
namespace {

using nlohmann::json;

constexpr int kStep = 70;
constexpr int kRow = 56;
constexpr int kRadius = 16;
constexpr int kMarginX = 40;
constexpr int kMarginY = 36;

const char* stroke_for(Domain d) {
  switch (d) {
    case Domain::Source:
      return "red";
    case Domain::Target:
      return "green";
    case Domain::Auxiliary:
      return "grey";
  }
  return "#000000";
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Direction parse_direction(const std::string& s) {
  if (s == to_string(Direction::SourceToTarget)) return Direction::SourceToTarget;
  if (s == to_string(Direction::TargetToSource)) return Direction::TargetToSource;
  throw FormatError("paths: unknown direction '" + s + "'");
}

}  // namespace

std::string paths_to_json(std::span<const PathRecord> records, const InstanceMeta& meta) {
  json list = json::array();
  for (const PathRecord& r : records) {
    json j;
    j["direction"] = std::string(to_string(r.direction));
    j["instance_ids"] = r.instance_ids;
    json domains = json::array();
    for (Domain d : r.domains) domains.push_back(std::string(to_string(d)));
    j["domains"] = domains;
    j["cosines"] = r.cosines;
    j["reached"] = r.reached;
    j["epoch"] = r.epoch;
    if (!meta.empty()) {
      json angles = json::array();
      for (std::int64_t id : r.instance_ids) {
        const auto it = meta.find(id);
        angles.push_back(it == meta.end() ? json(nullptr) : json(it->second));
      }
      j["angles"] = angles;
    }
    list.push_back(std::move(j));
  }
  return list.dump(2) + "\n";
}

std::vector<PathRecord> paths_from_json(const std::string& text) {
  std::vector<PathRecord> out;
  try {
    const json list = json::parse(text);
    if (!list.is_array()) throw FormatError("paths: top level must be a list");
    for (const json& j : list) {
      PathRecord r;
      r.direction = parse_direction(j.at("direction").get<std::string>());
      r.instance_ids = j.at("instance_ids").get<std::vector<std::int64_t>>();
      for (const json& d : j.at("domains")) {
        const auto domain = parse_domain(d.get<std::string>());
        if (!domain) throw FormatError("paths: unknown domain " + d.dump());
        r.domains.push_back(*domain);
      }
      r.cosines = j.at("cosines").get<std::vector<double>>();
      r.reached = j.at("reached").get<bool>();
      r.epoch = j.at("epoch").get<int>();
      if (r.domains.size() != r.instance_ids.size() ||
          r.cosines.size() + 1 != r.instance_ids.size()) {
        throw FormatError("paths: inconsistent record lengths");
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("paths: ") + e.what());
  }
  return out;
}

std::string paths_to_svg(std::span<const PathRecord> records, const InstanceMeta& meta) {
  std::size_t longest = 1;
  for (const PathRecord& r : records) longest = std::max(longest, r.instance_ids.size());
  const int width = 2 * kMarginX + static_cast<int>(longest - 1) * kStep + 2 * kRadius;
  const int height = 2 * kMarginY + static_cast<int>(std::max<std::size_t>(records.size(), 1)) * kRow;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  for (std::size_t row = 0; row < records.size(); ++row) {
    const PathRecord& r = records[row];
    const int y = kMarginY + static_cast<int>(row) * kRow + kRow / 2;
    auto x_of = [](std::size_t k) { return kMarginX + kRadius + static_cast<int>(k) * kStep; };
    svg << "<g class=\"path\" data-direction=\"" << to_string(r.direction) << "\" data-epoch=\""
        << r.epoch << "\">\n";
    for (std::size_t k = 0; k + 1 < r.instance_ids.size(); ++k) {
      svg << "<line x1=\"" << x_of(k) + kRadius << "\" y1=\"" << y << "\" x2=\""
          << x_of(k + 1) - kRadius << "\" y2=\"" << y
          << "\" stroke=\"#bbbbbb\" stroke-width=\"2\"/>\n";
      if (k < r.cosines.size()) {
        svg << "<text x=\"" << (x_of(k) + x_of(k + 1)) / 2 << "\" y=\"" << y - 6
            << "\" font-size=\"9\" text-anchor=\"middle\" fill=\"#555555\">"
            << fixed(r.cosines[k], 2) << "</text>\n";
      }
    }
    for (std::size_t k = 0; k < r.instance_ids.size(); ++k) {
      const Domain d = k < r.domains.size() ? r.domains[k] : Domain::Auxiliary;
      svg << "<circle cx=\"" << x_of(k) << "\" cy=\"" << y << "\" r=\"" << kRadius
          << "\" fill=\"#ffffff\" stroke=\"" << stroke_for(d) << "\" stroke-width=\"3\">"
          << "<title>id " << r.instance_ids[k] << "</title></circle>\n";
      svg << "<text x=\"" << x_of(k) << "\" y=\"" << y + 4
          << "\" font-size=\"12\" text-anchor=\"middle\">" << domain_tag(d) << "</text>\n";
      if (const auto it = meta.find(r.instance_ids[k]); it != meta.end()) {
        svg << "<text x=\"" << x_of(k) << "\" y=\"" << y + kRadius + 11
            << "\" font-size=\"9\" text-anchor=\"middle\">"
            << fixed(it->second * 180.0 / std::numbers::pi, 0) << "&#176;</text>\n";
      }
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

PathExport export_paths(std::span<const PathRecord> records, const InstanceMeta& meta,
                        const std::filesystem::path& stem, std::size_t max_paths) {
  std::vector<PathRecord> reached;
  for (const PathRecord& r : records) {
    if (r.reached && reached.size() < max_paths) reached.push_back(r);
  }
  PathExport result;
  result.exported = reached.size();
  result.warning = reached.empty();
  const auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
  };
  auto json_path = stem;
  json_path += ".json";
  auto svg_path = stem;
  svg_path += ".svg";
  write(json_path, paths_to_json(reached, meta));
  write(svg_path, paths_to_svg(reached, meta));
  return result;
}

}  // namespace derwent
