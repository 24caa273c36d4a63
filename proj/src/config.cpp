#include "derwent/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "derwent/error.hpp"

namespace derwent {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" +
                      std::string(v) + "'");
  }
  return out;
}

template <typename Int>
Int to_integer(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("config: '" + std::string(key) + "' expects an integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + std::string(key) + "' expects true/false, got '" +
                    std::string(v) + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field number(T TrainConfig::*member) {
  return {[member](RunConfig& c, std::string_view key, std::string_view v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.train.*member = to_double(key, v);
            } else {
              c.train.*member = to_integer<T>(key, v);
            }
          },
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.train.*member);
            } else {
              return std::to_string(c.train.*member);
            }
          }};
}

template <typename T>
Field chain_number(T ChainOptions::*member) {
  return {[member](RunConfig& c, std::string_view key, std::string_view v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.chain.*member = to_double(key, v);
            } else {
              c.chain.*member = to_integer<T>(key, v);
            }
          },
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.chain.*member);
            } else {
              return std::to_string(c.chain.*member);
            }
          }};
}

Field batch_quota(std::size_t BatchSizes::*member) {
  return {[member](RunConfig& c, std::string_view key, std::string_view v) {
            c.train.batch.*member = to_integer<std::size_t>(key, v);
          },
          [member](const RunConfig& c) { return std::to_string(c.train.batch.*member); }};
}

Field text(std::string RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view, std::string_view v) { c.*member = std::string(v); },
          [member](const RunConfig& c) { return c.*member; }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"command",
       {[](RunConfig& c, std::string_view, std::string_view v) {
          const auto cmd = parse_command(v);
          if (!cmd) throw ConfigError("config: unknown command '" + std::string(v) + "'");
          c.command = *cmd;
        },
        [](const RunConfig& c) { return std::string(to_string(c.command)); }}},
      {"lr_feature", number(&TrainConfig::lr_feature)},
      {"lr_classifier", number(&TrainConfig::lr_classifier)},
      {"momentum", number(&TrainConfig::momentum)},
      {"batch_source", batch_quota(&BatchSizes::source)},
      {"batch_target", batch_quota(&BatchSizes::target)},
      {"batch_auxiliary", batch_quota(&BatchSizes::auxiliary)},
      {"theta", number(&TrainConfig::theta)},
      {"alpha", number(&TrainConfig::alpha)},
      {"lambda1", number(&TrainConfig::lambda1)},
      {"lambda2", number(&TrainConfig::lambda2)},
      {"eta0", number(&TrainConfig::eta0)},
      {"epochs", number(&TrainConfig::epochs)},
      {"seed", number(&TrainConfig::seed)},
      {"ablate_lstm",
       {[](RunConfig& c, std::string_view key, std::string_view v) { c.train.ablate_lstm = to_bool(key, v); },
        [](const RunConfig& c) { return std::string(c.train.ablate_lstm ? "true" : "false"); }}},
      {"labeled_target_per_class", number(&TrainConfig::labeled_target_per_class)},
      {"dataset", text(&RunConfig::dataset)},
      {"output_dir", text(&RunConfig::output_dir)},
      {"checkpoint", text(&RunConfig::checkpoint)},
      {"n_domains", chain_number(&ChainOptions::n_domains)},
      {"per_domain", chain_number(&ChainOptions::per_domain)},
      {"d_in", chain_number(&ChainOptions::d_in)},
      {"data_seed", chain_number(&ChainOptions::seed)},
      {"radius", chain_number(&ChainOptions::radius)},
      {"class_shift", chain_number(&ChainOptions::class_shift)},
      {"class_tilt", chain_number(&ChainOptions::class_tilt)},
      {"noise", chain_number(&ChainOptions::noise)},
      {"sweep_axis",
       {[](RunConfig& c, std::string_view, std::string_view v) {
          const auto axis = parse_sweep_axis(v);
          if (!axis) throw ConfigError("config: unknown sweep axis '" + std::string(v) + "'");
          c.sweep_axis = *axis;
        },
        [](const RunConfig& c) { return std::string(to_string(c.sweep_axis)); }}},
      {"sweep_values",
       {[](RunConfig& c, std::string_view key, std::string_view v) {
          c.sweep_values.clear();
          while (!v.empty()) {
            const auto comma = v.find(',');
            const std::string_view item = trim(v.substr(0, comma));
            if (!item.empty()) c.sweep_values.push_back(to_double(key, item));
            if (comma == std::string_view::npos) break;
            v.remove_prefix(comma + 1);
          }
        },
        [](const RunConfig& c) {
          std::string out;
          for (std::size_t k = 0; k < c.sweep_values.size(); ++k) {
            out += (k ? "," : "") + format_double(c.sweep_values[k]);
          }
          return out;
        }}},
      {"sweep_seeds",
       {[](RunConfig& c, std::string_view key, std::string_view v) {
          c.sweep_seeds = to_integer<std::size_t>(key, v);
        },
        [](const RunConfig& c) { return std::to_string(c.sweep_seeds); }}},
      {"dump_graph",
       {[](RunConfig& c, std::string_view key, std::string_view v) { c.dump_graph = to_bool(key, v); },
        [](const RunConfig& c) { return std::string(c.dump_graph ? "true" : "false"); }}},
  };
  return table;
}

struct ParseState {
  bool lr_classifier_set = false;
  std::optional<Command> command;
};

void apply(RunConfig& c, std::string_view key, std::string_view value, ParseState& state) {
  if (key == "command") {
    const auto cmd = parse_command(value);
    if (cmd && state.command && *cmd != *state.command) {
      throw ConfigError("config: conflicting commands '" +
                        std::string(to_string(*state.command)) + "' and '" +
                        std::string(value) + "'");
    }
    state.command = cmd;
  }
  const auto& table = fields();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("config: unknown key '" + std::string(key) + "'");
  it->second.set(c, key, value);
  if (key == "lr_classifier") state.lr_classifier_set = true;
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Train:
      return "train";
    case Command::Baseline:
      return "baseline";
    case Command::Eval:
      return "eval";
    case Command::Paths:
      return "paths";
    case Command::Sweep:
      return "sweep";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view text) {
  for (Command c : {Command::Train, Command::Baseline, Command::Eval, Command::Paths,
                    Command::Sweep}) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

RunConfig parse_config(std::string_view file_text, const std::vector<Override>& flags,
                       const char* env_seed) {
  RunConfig c;
  ParseState state;
  std::size_t line_no = 0;
  while (!file_text.empty()) {
    ++line_no;
    const auto nl = file_text.find('\n');
    std::string_view line = file_text.substr(0, nl);
    file_text.remove_prefix(nl == std::string_view::npos ? file_text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) + " is not key=value");
    }
    apply(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), state);
  }
  if (env_seed != nullptr) apply(c, "seed", trim(env_seed), state);
  for (const auto& [key, value] : flags) apply(c, key, trim(value), state);
  if (!state.lr_classifier_set) c.train.lr_classifier = 10.0 * c.train.lr_feature;
  c.chain.labeled_target_per_class = c.train.labeled_target_per_class;
  validate(c);
  return c;
}

std::string config_snapshot(const RunConfig& config) {
  std::ostringstream out;
  // The command is recorded as a comment so the snapshot can seed any command.
  out << "# command = " << to_string(config.command) << '\n';
  for (const auto& [key, field] : fields()) {
    if (key != "command") out << key << " = " << field.get(config) << '\n';
  }
  return out.str();
}

void validate(const RunConfig& c) {
  validate(c.train);
  if (c.dataset.empty()) {
    if (c.chain.n_domains < 3) throw ConfigError("n_domains must be >= 3");
    if (c.chain.d_in < 3) throw ConfigError("d_in must be >= 3");
    if (!(c.chain.radius > 0.0)) throw ConfigError("radius must be positive");
    if (!(c.chain.noise >= 0.0) || !(c.chain.class_shift >= 0.0)) {
      throw ConfigError("noise and class_shift must be non-negative");
    }
    if (!(std::abs(c.chain.class_tilt) <= std::numbers::pi / 2)) {
      throw ConfigError("class_tilt must lie in [-pi/2, pi/2]");
    }
    if (2 * c.train.labeled_target_per_class >= c.chain.per_domain) {
      throw ConfigError("per_domain leaves no target instances for testing");
    }
  }
  if ((c.command == Command::Eval || c.command == Command::Paths) && c.checkpoint.empty()) {
    throw ConfigError(std::string(to_string(c.command)) + " needs a checkpoint");
  }
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (c.command == Command::Sweep) {
    if (c.sweep_values.size() < 2) throw ConfigError("sweep needs at least two values");
    if (c.sweep_seeds == 0) throw ConfigError("sweep_seeds must be positive");
    for (double v : c.sweep_values) {
      const bool integral = v == static_cast<double>(static_cast<long long>(v));
      if (c.sweep_axis == SweepAxis::Theta && (!integral || v < 2)) {
        throw ConfigError("theta sweep values must be integers >= 2");
      }
      if (c.sweep_axis == SweepAxis::LabeledTarget && (!integral || v < 1)) {
        throw ConfigError("labeled_target sweep values must be positive integers");
      }
      if (c.sweep_axis == SweepAxis::Alpha && !(v > 0.0)) {
        throw ConfigError("alpha sweep values must be positive");
      }
    }
  }
}

}  // namespace derwent
