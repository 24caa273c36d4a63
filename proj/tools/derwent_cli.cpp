// Command-line front end: derwent <train|baseline|eval|paths|sweep> [options].
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "derwent/config.hpp"
#include "derwent/error.hpp"
#include "derwent/run.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

// Flags that map one-to-one onto configuration keys.
constexpr FlagSpec kFlags[] = {
    {"--output-dir", "output_dir", "Directory for all artifacts"},
    {"--seed", "seed", "Training seed"},
    {"--epochs", "epochs", "Number of epochs"},
    {"--alpha", "alpha", "Sigmoid sharpness in the losses"},
    {"--theta", "theta", "Maximum walk length"},
    {"--eta0", "eta0", "Initial graph temperature"},
    {"--lambda1", "lambda1", "Weight of the reconstruction loss"},
    {"--lambda2", "lambda2", "Weight of the classification loss"},
    {"--lr-feature", "lr_feature", "Learning rate of the feature extractor"},
    {"--lr-classifier", "lr_classifier", "Learning rate of the classifier"},
    {"--momentum", "momentum", "Nesterov momentum"},
    {"--labeled-target", "labeled_target_per_class", "Labeled target instances per class"},
    {"--dataset", "dataset", "Dataset CSV (synthetic chain when omitted)"},
    {"--checkpoint", "checkpoint", "Checkpoint to resume, evaluate or trace"},
    {"--axis", "sweep_axis", "Sweep axis: theta, alpha or labeled_target"},
    {"--values", "sweep_values", "Comma-separated sweep values"},
    {"--seeds", "sweep_seeds", "Seeds per sweep value"},
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw derwent::ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distant-domain transfer learning with random-walk bridges"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> values(std::size(kFlags));
  std::vector<std::string> extra;
  bool ablate_lstm = false;
  bool dump_graph = false;

  const char* commands[][2] = {{"train", "Train on the configured data"},
                               {"baseline", "Train the target-only network"},
                               {"eval", "Evaluate a checkpoint on the target test set"},
                               {"paths", "Export walks of a checkpoint as JSON and SVG"},
                               {"sweep", "Sensitivity sweep over one hyperparameter"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value configuration file");
    for (std::size_t k = 0; k < std::size(kFlags); ++k) {
      sub->add_option(kFlags[k].flag, values[k], kFlags[k].help);
    }
    sub->add_flag("--ablate-lstm", ablate_lstm, "Drop the reconstruction loss");
    sub->add_flag("--dump-graph", dump_graph, "Write both graphs of the first step");
    sub->add_option("--set", extra, "Any configuration key as key=value")->take_all();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    std::vector<derwent::Override> flags;
    flags.emplace_back("command", app.get_subcommands().front()->get_name());
    CLI::App* sub = app.get_subcommands().front();
    for (std::size_t k = 0; k < std::size(kFlags); ++k) {
      if (sub->count(kFlags[k].flag) > 0) flags.emplace_back(kFlags[k].key, values[k]);
    }
    if (ablate_lstm) flags.emplace_back("ablate_lstm", "true");
    if (dump_graph) flags.emplace_back("dump_graph", "true");
    for (const std::string& kv : extra) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw derwent::ConfigError("--set expects key=value, got " + kv);
      flags.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    const std::string file_text = config_path.empty() ? std::string() : read_file(config_path);
    const derwent::RunConfig config =
        derwent::parse_config(file_text, flags, std::getenv("DERWENT_SEED"));
    derwent::execute(config, std::cout);
    return 0;
  } catch (const derwent::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const derwent::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const derwent::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
