#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "derwent/checkpoint.hpp"
#include "derwent/config.hpp"
#include "derwent/dataset_io.hpp"
#include "derwent/error.hpp"
#include "derwent/paths_export.hpp"
#include "derwent/run.hpp"
#include "derwent/sweep.hpp"
#include "doctest.h"

using namespace derwent;
namespace fs = std::filesystem;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("derwent_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ChainOptions tiny_chain() {
  ChainOptions o;
  o.per_domain = 40;
  o.d_in = 5;
  o.seed = 3;
  return o;
}

RunConfig tiny_run(const fs::path& dir, Command command) {
  RunConfig c;
  c.command = command;
  c.chain = tiny_chain();
  c.train.epochs = 1;
  c.output_dir = dir.string();
  return c;
}

PathRecord sample_record() {
  PathRecord r;
  r.direction = Direction::SourceToTarget;
  r.instance_ids = {4, 250, 610, 801};
  r.domains = {Domain::Source, Domain::Auxiliary, Domain::Auxiliary, Domain::Target};
  r.cosines = {0.875, -0.125, 0.3333333333333333};
  r.reached = true;
  r.epoch = 9;
  return r;
}

}  // namespace

TEST_CASE("empty config gives the documented defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.command == Command::Train);
  CHECK(c.train.batch.source == 10);
  CHECK(c.train.batch.target == 8);
  CHECK(c.train.batch.auxiliary == 110);
  CHECK(c.train.batch.total() == 128);
  CHECK(c.train.momentum == 0.9);
  CHECK(c.train.alpha == 3.0);
  CHECK(c.train.lambda1 == 1.0);
  CHECK(c.train.lambda2 == 1.0);
  CHECK(c.train.eta0 == 1.1);
  CHECK(c.train.lr_feature == 1e-3);
  CHECK(c.train.lr_classifier == doctest::Approx(1e-2));
  CHECK(c.train.labeled_target_per_class == 10);
  CHECK(c.dataset.empty());
}

TEST_CASE("flags override the file, the file overrides defaults") {
  CHECK(parse_config("alpha = 3\n").train.alpha == 3.0);
  CHECK(parse_config("alpha=3", {{"alpha", "5"}}).train.alpha == 5.0);
  CHECK(parse_config("# comment\n\n  theta = 7  # trailing\n").train.theta == 7);
  // lr_classifier tracks lr_feature unless set explicitly.
  CHECK(parse_config("lr_feature = 0.002").train.lr_classifier == doctest::Approx(0.02));
  CHECK(parse_config("lr_feature = 0.002\nlr_classifier = 0.5").train.lr_classifier == 0.5);
}

TEST_CASE("DERWENT_SEED sits between the file and the flags") {
  CHECK(parse_config("seed = 4", {}, "11").train.seed == 11);
  CHECK(parse_config("seed = 4", {{"seed", "12"}}, "11").train.seed == 12);
  CHECK_THROWS_AS(parse_config("", {}, "eleven"), ConfigError);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("alpha=-1"), ConfigError);
  CHECK_THROWS_AS(parse_config("alpha = 0"), ConfigError);
  CHECK_THROWS_AS(parse_config("learning_rate = 0.1"), ConfigError);
  CHECK_THROWS_AS(parse_config("theta = ten"), ConfigError);
  CHECK_THROWS_AS(parse_config("theta = 2.5"), ConfigError);
  CHECK_THROWS_AS(parse_config("ablate_lstm = maybe"), ConfigError);
  CHECK_THROWS_AS(parse_config("alpha 3"), ConfigError);
  CHECK_THROWS_AS(parse_config("command = train\ncommand = sweep"), ConfigError);
  CHECK_THROWS_AS(parse_config("command = train", {{"command", "baseline"}}), ConfigError);
  CHECK_NOTHROW(parse_config("command = train", {{"command", "train"}}));
  CHECK_THROWS_AS(parse_config("command = paths"), ConfigError);
  CHECK_NOTHROW(parse_config("command = paths\ncheckpoint = x.drwt"));
  CHECK_THROWS_AS(parse_config("command = sweep\nsweep_values = 3"), ConfigError);
  CHECK_THROWS_AS(parse_config("command = sweep\nsweep_axis = theta\nsweep_values = 5,7.5"),
                  ConfigError);
  CHECK_NOTHROW(parse_config("command = sweep\nsweep_axis = alpha\nsweep_values = 1,3,5"));
}

TEST_CASE("config snapshot reads back to the same configuration") {
  RunConfig c = parse_config(
      "command = sweep\nsweep_axis = alpha\nsweep_values = 1,2.5,5\nalpha = 0.3\n"
      "lr_feature = 0.00037\nseed = 99\nablate_lstm = true\nnoise = 0.1\ndataset = d.csv\n");
  const std::string snap = config_snapshot(c);
  CHECK(snap.rfind("# command = sweep\n", 0) == 0);
  RunConfig back = parse_config(snap, {{"command", "sweep"}});
  CHECK(back == c);
}

TEST_CASE("dataset files round-trip") {
  ChainOptions o = tiny_chain();
  const Datasets d = gen_synthetic_chain(o);
  std::stringstream s;
  write_dataset(s, d);
  Datasets back = read_dataset(s, o.labeled_target_per_class);
  Datasets expected = d;
  for (auto* pool :
       {&expected.source, &expected.auxiliary, &expected.target_train, &expected.target_test}) {
    for (Instance& inst : *pool) inst.meta.reset();
  }
  CHECK(back == expected);

  std::istringstream bad_header("five,3\n");
  CHECK_THROWS_AS(read_dataset(bad_header, 1), FormatError);
  std::istringstream short_row("2,1\n0,source,1,0.5\n");
  CHECK_THROWS_AS(read_dataset(short_row, 1), FormatError);
  std::istringstream bad_domain("1,1\n0,moon,1,0.5\n");
  CHECK_THROWS_AS(read_dataset(bad_domain, 1), FormatError);
}

TEST_CASE("metrics CSV layout") {
  MetricsRow a{0, 0, 1.5, 0.25, 2.0, 3.75, 4, 5, std::nullopt};
  MetricsRow b{0, 1, 0.1, 0.0, 1.0, 1.1, 6, 7, 0.875};
  std::ostringstream out;
  write_metrics_csv(out, std::vector<MetricsRow>{a, b});
  CHECK(out.str() ==
        "epoch,step,l1,l2,l3,objective,walks_reached_s2t,walks_reached_t2s,target_test_acc\n"
        "0,0,1.5,0.25,2,3.75,4,5,\n"
        "0,1,0.10000000000000001,0,1,1.1000000000000001,6,7,0.875\n");
}

TEST_CASE("checkpoints round-trip bit-exactly and reject corrupt files") {
  TrainConfig c;
  TrainState state = initial_state(c, 7);
  state.epoch = 5;
  state.optimizer.velocity.phi_w(0, 0) = -0.125;
  std::stringstream s;
  write_checkpoint(s, state);
  const std::string bytes = s.str();
  CHECK(bytes.substr(0, 4) == "DRWT");
  std::istringstream in(bytes);
  const TrainState back = read_checkpoint(in);
  CHECK(back.epoch == 5);
  CHECK(back.params == state.params);
  CHECK(back.optimizer == state.optimizer);

  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  std::istringstream m(wrong_magic);
  CHECK_THROWS_AS(read_checkpoint(m), FormatError);
  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  std::istringstream v(wrong_version);
  CHECK_THROWS_AS(read_checkpoint(v), FormatError);
  for (std::size_t cut : {std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    std::istringstream t(bytes.substr(0, cut));
    CHECK_THROWS_AS(read_checkpoint(t), FormatError);
  }
  std::istringstream trailing(bytes + "x");
  CHECK_THROWS_AS(read_checkpoint(trailing), FormatError);
}

TEST_CASE("path JSON round-trips") {
  PathRecord r = sample_record();
  PathRecord u = r;
  u.direction = Direction::TargetToSource;
  u.instance_ids = {801, 2};
  u.domains = {Domain::Target, Domain::Auxiliary};
  u.cosines = {-1.0};
  u.reached = false;
  const std::vector<PathRecord> records{r, u};
  CHECK(paths_from_json(paths_to_json(records)) == records);
  const InstanceMeta meta{{4, 0.0}, {250, 0.78}, {610, 1.57}, {801, 3.14}};
  CHECK(paths_from_json(paths_to_json(records, meta)) == records);
  CHECK_THROWS_AS(paths_from_json("{"), FormatError);
  CHECK_THROWS_AS(paths_from_json(R"([{"direction":"SourceToTarget"}])"), FormatError);
}

TEST_CASE("path SVG structure") {
  const PathRecord r = sample_record();
  const std::vector<PathRecord> one{r};
  const InstanceMeta meta{{4, 0.0}, {801, 3.141592653589793}};
  const std::string svg = paths_to_svg(one, meta);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(count_of(svg, "<circle") == 4);
  CHECK(count_of(svg, "<line") == 3);
  CHECK(count_of(svg, "stroke=\"red\"") == 1);
  CHECK(count_of(svg, "stroke=\"green\"") == 1);
  CHECK(svg.find("180&#176;") != std::string::npos);
  CHECK(svg.find("http://") == svg.find("http://www.w3.org/2000/svg"));
  CHECK(paths_to_svg(one, meta) == svg);
}

TEST_CASE("path export keeps reached walks only and warns when none") {
  const fs::path dir = scratch_dir("export");
  PathRecord r = sample_record();
  PathRecord u = r;
  u.reached = false;
  const std::vector<PathRecord> mixed{u, r, r};
  const PathExport e = export_paths(mixed, {}, dir / "p", 1);
  CHECK(e.exported == 1);
  CHECK_FALSE(e.warning);
  CHECK(paths_from_json(slurp(dir / "p.json")) == std::vector<PathRecord>{r});

  const std::vector<PathRecord> none{u};
  const PathExport w = export_paths(none, {}, dir / "q");
  CHECK(w.exported == 0);
  CHECK(w.warning);
  CHECK(paths_from_json(slurp(dir / "q.json")).empty());
  CHECK(count_of(slurp(dir / "q.svg"), "<circle") == 0);
}

TEST_CASE("sweep bookkeeping and repeatability") {
  TrainConfig base;
  base.epochs = 1;
  const SweepData data = [](std::size_t replicate, std::size_t labeled) {
    ChainOptions o = tiny_chain();
    o.seed += replicate;
    o.labeled_target_per_class = labeled;
    return gen_synthetic_chain(o);
  };
  const std::vector<double> values{1, 3, 5};
  std::size_t runs = 0;
  std::vector<std::uint64_t> seeds;
  const auto rows = run_sweep(base, SweepAxis::Alpha, values, 3, data, [&](const SweepRun& r) {
    ++runs;
    seeds.push_back(r.config.seed);
    CHECK(r.config.alpha == r.value);
  });
  CHECK(runs == 9);
  CHECK(seeds == std::vector<std::uint64_t>{0, 1, 2, 0, 1, 2, 0, 1, 2});
  REQUIRE(rows.size() == 3);
  for (const SweepRow& row : rows) {
    CHECK(row.accuracies.size() == 3);
    CHECK(row.mean_accuracy ==
          doctest::Approx((row.accuracies[0] + row.accuracies[1] + row.accuracies[2]) / 3));
  }
  std::ostringstream first, second;
  write_sweep_csv(first, rows);
  write_sweep_csv(second, run_sweep(base, SweepAxis::Alpha, values, 3, data));
  CHECK(first.str() == second.str());
  CHECK(first.str().rfind("value,mean_accuracy,acc_1,acc_2,acc_3\n", 0) == 0);
  CHECK(count_of(first.str(), "\n") == 4);

  CHECK(apply_axis(base, SweepAxis::Theta, 20).theta == 20);
  CHECK(apply_axis(base, SweepAxis::LabeledTarget, 5).labeled_target_per_class == 5);
}

TEST_CASE("every run leaves a reconstructible output directory") {
  const fs::path dir = scratch_dir("train");
  RunConfig c = tiny_run(dir / "a", Command::Train);
  c.dump_graph = true;
  std::ostringstream log;
  const RunSummary s = execute(c, log);
  for (const char* name : {"config.txt", "metrics.csv", "checkpoint.drwt", "walks.txt",
                           "accuracy.txt", "graph_forward.csv", "graph_backward.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / "a" / name), name);
  }
  CHECK(s.accuracy >= 0.0);

  // Re-running from the snapshot alone reproduces the run byte for byte.
  RunConfig again = parse_config(slurp(dir / "a" / "config.txt"), {{"command", "train"}});
  again.output_dir = (dir / "b").string();
  execute(again, log);
  CHECK(slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv"));
  CHECK(slurp(dir / "a" / "checkpoint.drwt") == slurp(dir / "b" / "checkpoint.drwt"));

  // eval of the saved checkpoint agrees with the training run.
  RunConfig ev = tiny_run(dir / "e", Command::Eval);
  ev.checkpoint = (dir / "a" / "checkpoint.drwt").string();
  CHECK(execute(ev, log).accuracy == s.accuracy);

  RunConfig paths = tiny_run(dir / "p", Command::Paths);
  paths.checkpoint = ev.checkpoint;
  execute(paths, log);
  CHECK(fs::exists(dir / "p" / "paths.json"));
  CHECK(fs::exists(dir / "p" / "paths.svg"));
  for (const PathRecord& r : paths_from_json(slurp(dir / "p" / "paths.json"))) {
    CHECK(r.reached);
    if (r.direction == Direction::SourceToTarget) {
      CHECK(r.domains.front() == Domain::Source);
      CHECK(r.domains.back() == Domain::Target);
    }
  }

  RunConfig mismatched = ev;
  mismatched.chain.d_in = 6;
  mismatched.output_dir = (dir / "m").string();
  CHECK_THROWS_AS(execute(mismatched, log), ConfigError);
}

TEST_CASE("resuming from a checkpoint matches an uninterrupted run") {
  const fs::path dir = scratch_dir("resume");
  std::ostringstream log;
  RunConfig full = tiny_run(dir / "full", Command::Train);
  full.train.epochs = 2;
  execute(full, log);
  RunConfig half = tiny_run(dir / "half", Command::Train);
  execute(half, log);
  RunConfig rest = full;
  rest.output_dir = (dir / "rest").string();
  rest.checkpoint = (dir / "half" / "checkpoint.drwt").string();
  execute(rest, log);
  CHECK(slurp(dir / "full" / "checkpoint.drwt") == slurp(dir / "rest" / "checkpoint.drwt"));
  CHECK(slurp(dir / "full" / "walks.txt") == slurp(dir / "rest" / "walks.txt"));
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch_dir("exit");
  const std::string cli = DERWENT_CLI_PATH;
  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > " + (dir / "out.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  const std::string out = " --output-dir " + (dir / "run").string();
  CHECK(run("train --epochs 0 --set per_domain=40" + out) == 0);
  CHECK(run("train --alpha -1" + out) == 2);
  CHECK(run("train --set nonsense=1" + out) == 2);
  CHECK(run("eval" + out) == 2);
  CHECK(run("fly") == 2);
  CHECK(run("eval --checkpoint " + (dir / "missing.drwt").string() + out) == 2);
  // Non-finite inputs make the first step fail numerically.
  {
    std::ofstream f(dir / "nan.csv");
    f << "1,8\n0,source,0,nan\n1,source,1,1\n2,auxiliary,,0.5\n3,auxiliary,,0.25\n"
         "4,target,0,1\n5,target,1,2\n6,target,0,3\n7,target,1,4\n";
  }
  CHECK(run("train --labeled-target 1 --set batch_target=2 --set batch_auxiliary=2 --set "
            "batch_source=2 --dataset " +
            (dir / "nan.csv").string() + out) == 3);
}
