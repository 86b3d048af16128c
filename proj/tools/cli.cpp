#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecml/checkpoint.hpp"
#include "ecml/data.hpp"
#include "ecml/eval.hpp"
#include "ecml/experiment.hpp"
#include "ecml/opinion_json.hpp"
#include "ecml/random.hpp"
#include "ecml/run_config.hpp"

namespace ecml::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Marks failures that happen while reading or shaping input data.
struct DataStageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string timestamp_suffix() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

template <typename F>
auto data_stage(F&& f) {
  try {
    return f();
  } catch (const DataError& e) {
    throw DataStageError(e.what());
  } catch (const std::invalid_argument& e) {
    throw DataStageError(e.what());
  }
}

int cmd_train(const fs::path& config_path, const std::optional<fs::path>& output_override,
              bool timestamp, std::ostream& out) {
  RunConfig config = load_run_config(config_path);
  if (output_override) config.output_dir = *output_override;
  if (timestamp) config.timestamp = true;

  std::string name = config_hash(config);
  if (config.timestamp) name += "-" + timestamp_suffix();
  const fs::path run_dir = config.output_dir / name;
  fs::create_directories(run_dir);
  write_text(run_dir / "config.resolved", to_string(config));

  const auto raw = data_stage([&] { return split_source(config, config.seed); });
  save_csv(raw.second, run_dir / "test");

  const auto data = data_stage([&] { return prepare_data(config, config.seed); });
  NetConfig net_config = config.net;
  net_config.input_dims = data.train.view_dims();
  net_config.num_classes = data.train.num_classes();
  net_config.seed = config.seed;
  EvidentialNet net(net_config);
  const auto trace = train(net, data.train, config.loss);

  {
    std::ofstream log(run_dir / "train_log.jsonl");
    for (const auto& record : trace.epochs) log << epoch_record_json(record) << '\n';
  }
  save_checkpoint(Checkpoint{net.config(), config.loss, data.standardizer, net.parameters()},
                  run_dir / "checkpoint.json");
  export_report(evaluate(net, data.test), run_dir / "report.json");
  if (config.runs > 1) {
    write_text(run_dir / "multi_run.json", summary_to_string(multi_run(config, config.runs)));
  }
  out << run_dir.string() << '\n';
  return kExitOk;
}

int cmd_eval(const fs::path& checkpoint_path, const fs::path& data_dir, const InjectionSpec& injection,
             std::optional<std::uint64_t> seed, const fs::path& output, std::ostream& out) {
  const auto checkpoint = load_checkpoint(checkpoint_path);
  const auto net = checkpoint.make_net();
  const auto test = data_stage([&] {
    auto raw = load_csv(data_dir);
    if (raw.view_dims() != checkpoint.net.input_dims ||
        raw.num_classes() != checkpoint.net.num_classes) {
      throw DataError("test data shape does not match the checkpoint");
    }
    return apply_injection(checkpoint.standardizer.apply(raw), injection,
                           seed.value_or(checkpoint.net.seed));
  });
  const auto report = evaluate(net, test);
  export_report(report, output);
  out << output.string() << '\n';
  return kExitOk;
}

int cmd_fuse(std::istream& in, std::ostream& out) {
  const auto opinions = read_opinion_stream(in);
  if (opinions.empty()) throw std::invalid_argument("no opinions on standard input");
  for (const auto& w : opinions) {
    if (w.num_classes() != opinions.front().num_classes()) {
      throw std::invalid_argument("opinions have different class counts");
    }
  }
  const Opinion fused = opinions.size() == 1 ? opinions.front() : fuse_opinions(opinions);
  const auto decision = decide(fused);
  const auto projected = project(fused);

  json pairs = json::array();
  json matrix = json::array();
  if (opinions.size() > 1) {
    for (const auto& row : conflict_matrix(opinions)) matrix.push_back(row);
    for (std::size_t p = 0; p < opinions.size(); ++p) {
      for (std::size_t q = p + 1; q < opinions.size(); ++q) {
        pairs.push_back({{"views", {p, q}},
                         {"projected_distance", projected_distance(opinions[p], opinions[q])},
                         {"conjunctive_certainty", conjunctive_certainty(opinions[p], opinions[q])},
                         {"conflictive_degree", conflictive_degree(opinions[p], opinions[q])}});
      }
    }
  }
  json doc = {{"fused", to_json(fused)},
              {"projected_probability",
               std::vector<double>(projected.values().begin(), projected.values().end())},
              {"decision", {{"label", decision.label}, {"reliability", decision.reliability}}},
              {"conflict", std::move(matrix)},
              {"pairs", std::move(pairs)}};
  out << doc.dump(2) << '\n';
  return kExitOk;
}

struct GenDataOptions {
  SyntheticSpec spec;
  InjectionSpec injection;
  fs::path output;
};

int cmd_gen_data(const GenDataOptions& options, std::ostream& out) {
  auto dataset = generate_synthetic(options.spec);
  dataset = apply_injection(dataset, options.injection, options.spec.seed);
  save_csv(dataset, options.output);
  out << options.output.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evidential conflictive multi-view learning"};
  app.require_subcommand(1);

  fs::path config_path;
  std::optional<fs::path> output_override;
  bool timestamp = false;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a run configuration");
  train_cmd->add_option("config", config_path, "Run configuration file")->required();
  train_cmd->add_option("--output-dir", output_override, "Override output.dir");
  train_cmd->add_flag("--timestamp", timestamp, "Append a UTC timestamp to the run directory");

  fs::path checkpoint_path;
  fs::path data_dir;
  fs::path report_path = "report.json";
  InjectionSpec injection;
  std::optional<std::uint64_t> eval_seed;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a CSV test set");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval_cmd->add_option("--data", data_dir, "Directory with view_*.csv and labels.csv")->required();
  eval_cmd->add_option("--noise-fraction", injection.noise_fraction)->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--noise-sigma", injection.noise_sigma)->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--unaligned-fraction", injection.unaligned_fraction)
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--seed", eval_seed, "Injection seed (default: checkpoint seed)");
  eval_cmd->add_option("--output", report_path, "Report path");

  auto* fuse_cmd =
      app.add_subcommand("fuse", "Fuse opinion/evidence JSON objects read from standard input");

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic multi-view dataset as CSV");
  gen_cmd->add_option("--views", gen.spec.views)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--classes", gen.spec.classes)->check(CLI::Range(2, 1 << 20));
  gen_cmd->add_option("--instances", gen.spec.instances)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--dim", gen.spec.dim)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--separation", gen.spec.separation)->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen.spec.seed);
  gen_cmd->add_option("--noise-fraction", gen.injection.noise_fraction)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--noise-sigma", gen.injection.noise_sigma)->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--unaligned-fraction", gen.injection.unaligned_fraction)
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--output", gen.output, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(config_path, output_override, timestamp, out);
    if (*eval_cmd) return cmd_eval(checkpoint_path, data_dir, injection, eval_seed, report_path, out);
    if (*fuse_cmd) return cmd_fuse(in, out);
    if (*gen_cmd) return cmd_gen_data(gen, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kExitCheckpoint;
  } catch (const DataStageError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ecml::cli
