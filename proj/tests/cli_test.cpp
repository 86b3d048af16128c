#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "../tools/cli.hpp"
#include "ecml/checkpoint.hpp"
#include "ecml/data.hpp"
#include "ecml/eval.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = ECML_FIXTURES_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args, const std::string& input = {}) {
  args.insert(args.begin(), "ecml");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out;
  std::ostringstream err;
  const int code = ecml::cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ecml_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string trimmed(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run_cli({}).code == ecml::cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}).code == ecml::cli::kExitUsage);
  CHECK(run_cli({"eval", "--checkpoint", "x.json"}).code == ecml::cli::kExitUsage);
  CHECK(run_cli({"gen-data", "--output", "x", "--classes", "1"}).code == ecml::cli::kExitUsage);
  CHECK(run_cli({"--help"}).code == ecml::cli::kExitOk);
}

TEST_CASE("train") {
  const auto out_dir = scratch("train");
  const auto first = run_cli({"train", (kFixtures / "small.cfg").string(), "--output-dir", out_dir.string()});
  REQUIRE(first.code == ecml::cli::kExitOk);
  const fs::path run_dir = trimmed(first.out);
  CHECK(run_dir.parent_path() == out_dir);
  CHECK(run_dir.filename().string().size() == 16);
  for (const char* file : {"checkpoint.json", "config.resolved", "train_log.jsonl", "report.json",
                           "test/view_0.csv", "test/labels.csv"}) {
    CHECK_MESSAGE(fs::exists(run_dir / file), file);
  }

  std::ifstream log(run_dir / "train_log.jsonl");
  std::string line;
  int epochs = 0;
  while (std::getline(log, line)) {
    const auto record = json::parse(line);
    CHECK(record.at("epoch") == ++epochs);
    CHECK(record.contains("total"));
  }
  CHECK(epochs == 5);

  const auto report = ecml::load_report(run_dir / "report.json");
  CHECK(report.group(ecml::TagKind::noise_view) != nullptr);
  CHECK(report.group(ecml::TagKind::unaligned_view) != nullptr);

  SUBCASE("same config and seed give identical files") {
    const auto checkpoint = slurp(run_dir / "checkpoint.json");
    const auto report_text = slurp(run_dir / "report.json");
    fs::remove_all(run_dir);
    const auto again = run_cli({"train", (kFixtures / "small.cfg").string(), "--output-dir", out_dir.string()});
    REQUIRE(again.code == ecml::cli::kExitOk);
    CHECK(trimmed(again.out) == run_dir.string());
    CHECK(slurp(run_dir / "checkpoint.json") == checkpoint);
    CHECK(slurp(run_dir / "report.json") == report_text);
  }
  SUBCASE("timestamped run directories") {
    const auto stamped = run_cli(
        {"train", (kFixtures / "small.cfg").string(), "--output-dir", out_dir.string(), "--timestamp"});
    REQUIRE(stamped.code == ecml::cli::kExitOk);
    const auto name = fs::path(trimmed(stamped.out)).filename().string();
    CHECK(name.rfind(run_dir.filename().string() + "-", 0) == 0);
    CHECK(name.back() == 'Z');
  }
  SUBCASE("resolved config parses back") {
    const auto resolved = run_cli({"train", (run_dir / "config.resolved").string(), "--output-dir",
                                   (out_dir / "resolved").string()});
    CHECK(resolved.code == ecml::cli::kExitOk);
    CHECK(slurp(fs::path(trimmed(resolved.out)) / "checkpoint.json") == slurp(run_dir / "checkpoint.json"));
  }
}

TEST_CASE("train error paths") {
  const auto out_dir = scratch("train_errors");
  const auto bad = run_cli({"train", (kFixtures / "malformed.cfg").string(), "--output-dir", out_dir.string()});
  CHECK(bad.code == ecml::cli::kExitUsage);
  CHECK(bad.err.find("line 3") != std::string::npos);
  CHECK(bad.err.find("net.dropout") != std::string::npos);

  CHECK(run_cli({"train", (kFixtures / "missing.cfg").string()}).code == ecml::cli::kExitUsage);

  const auto config = out_dir / "ragged.cfg";
  fs::create_directories(out_dir);
  std::ofstream(config) << "data.source = csv\ndata.path = " << (kFixtures / "ragged").string()
                        << "\noutput.dir = " << out_dir.string() << "\n";
  const auto ragged = run_cli({"train", config.string()});
  CHECK(ragged.code == ecml::cli::kExitData);
  CHECK(ragged.err.find("view_0.csv:3") != std::string::npos);
}

TEST_CASE("train on CSV data with a path relative to the config") {
  const auto out_dir = scratch("train_csv");
  const auto result = run_cli({"train", (kFixtures / "csv.cfg").string(), "--output-dir", out_dir.string()});
  CHECK(result.code == ecml::cli::kExitOk);
}

TEST_CASE("gen-data and eval") {
  const auto dir = scratch("eval");
  const auto data_dir = dir / "data";
  const auto gen = run_cli({"gen-data", "--views", "2", "--classes", "3", "--instances", "90", "--dim", "4",
                            "--seed", "4", "--output", data_dir.string()});
  REQUIRE(gen.code == ecml::cli::kExitOk);
  const auto data = ecml::load_csv(data_dir);
  CHECK(data.size() == 90);
  CHECK(data.num_views() == 2);

  SUBCASE("gen-data is deterministic and can inject") {
    const auto noisy_dir = dir / "noisy";
    REQUIRE(run_cli({"gen-data", "--views", "2", "--classes", "3", "--instances", "90", "--dim", "4", "--seed",
                     "4", "--noise-fraction", "0.5", "--noise-sigma", "3", "--output", noisy_dir.string()})
                .code == ecml::cli::kExitOk);
    const auto noisy = ecml::load_csv(noisy_dir);
    CHECK(std::ranges::count_if(noisy.tags(), [](const auto& t) { return !t.is_normal(); }) == 45);
    CHECK(noisy.labels() == data.labels());
    CHECK(run_cli({"gen-data", "--views", "2", "--classes", "3", "--instances", "90", "--dim", "4", "--seed",
                   "4", "--output", (dir / "again").string()})
              .code == ecml::cli::kExitOk);
    CHECK(ecml::load_csv(dir / "again") == data);
  }

  const auto train_dir = dir / "runs";
  REQUIRE(run_cli({"train", (kFixtures / "small.cfg").string(), "--output-dir", train_dir.string()}).code ==
          ecml::cli::kExitOk);
  const auto run_dir = *fs::directory_iterator(train_dir);
  const auto checkpoint = (run_dir.path() / "checkpoint.json").string();
  const auto test_dir = (run_dir.path() / "test").string();

  SUBCASE("no flags gives a normal-only report") {
    const auto report_path = dir / "plain.json";
    const auto r = run_cli({"eval", "--checkpoint", checkpoint, "--data", test_dir, "--output", report_path.string()});
    REQUIRE(r.code == ecml::cli::kExitOk);
    const auto report = ecml::load_report(report_path);
    CHECK(report.groups.size() == 1);
    CHECK_FALSE(report.accuracy_conflictive.has_value());
  }
  SUBCASE("noise flags add a noise group") {
    const auto report_path = dir / "noise.json";
    REQUIRE(run_cli({"eval", "--checkpoint", checkpoint, "--data", test_dir, "--noise-sigma", "5",
                     "--noise-fraction", "0.5", "--output", report_path.string()})
                .code == ecml::cli::kExitOk);
    CHECK(ecml::load_report(report_path).group(ecml::TagKind::noise_view) != nullptr);
  }
  SUBCASE("unaligned flag adds an unaligned group") {
    const auto report_path = dir / "unaligned.json";
    REQUIRE(run_cli({"eval", "--checkpoint", checkpoint, "--data", test_dir, "--unaligned-fraction", "0.3",
                     "--output", report_path.string()})
                .code == ecml::cli::kExitOk);
    CHECK(ecml::load_report(report_path).group(ecml::TagKind::unaligned_view) != nullptr);
  }
  SUBCASE("checkpoint problems exit with 4") {
    auto text = slurp(checkpoint);
    const auto at = text.find("\"version\": 1");
    REQUIRE(at != std::string::npos);
    text.replace(at, 12, "\"version\": 9");
    const auto wrong = dir / "wrong_version.json";
    std::ofstream(wrong) << text;
    CHECK(run_cli({"eval", "--checkpoint", wrong.string(), "--data", test_dir}).code == ecml::cli::kExitCheckpoint);
    CHECK(run_cli({"eval", "--checkpoint", (dir / "nope.json").string(), "--data", test_dir}).code ==
          ecml::cli::kExitCheckpoint);
  }
  SUBCASE("mismatched data exits with 3") {
    CHECK(run_cli({"eval", "--checkpoint", checkpoint, "--data", (kFixtures / "tiny").string()}).code ==
          ecml::cli::kExitData);
  }
}

TEST_CASE("fuse") {
  SUBCASE("opposing evidence") {
    const auto r = run_cli({"fuse"}, R"({"evidence": [2, 0]} {"evidence": [0, 2]})");
    REQUIRE(r.code == ecml::cli::kExitOk);
    const auto doc = json::parse(r.out);
    CHECK(std::abs(doc.at("fused").at("uncertainty").get<double>() - 0.5) <= 1e-12);
    CHECK(doc.at("decision").at("label") == 0);
    CHECK(std::abs(doc.at("decision").at("reliability").get<double>() - 0.5) <= 1e-12);
    CHECK(doc.at("pairs").size() == 1);
    CHECK(doc.at("conflict").size() == 2);
  }
  SUBCASE("single opinion is echoed") {
    const auto r = run_cli({"fuse"}, R"([{"belief": [0.2, 0.3, 0.1], "uncertainty": 0.4}])");
    REQUIRE(r.code == ecml::cli::kExitOk);
    const auto doc = json::parse(r.out);
    CHECK(doc.at("fused").at("belief") == json::array({0.2, 0.3, 0.1}));
    CHECK(doc.at("fused").at("uncertainty") == 0.4);
    CHECK(doc.at("conflict").empty());
    CHECK(doc.at("pairs").empty());
  }
  SUBCASE("sharp opposing observers") {
    const auto r = run_cli({"fuse"}, slurp(kFixtures / "colorblind.json"));
    REQUIRE(r.code == ecml::cli::kExitOk);
    const auto doc = json::parse(r.out);
    CHECK(doc.at("fused").at("uncertainty").get<double>() >= 0.01 - 1e-12);
    CHECK(doc.at("pairs")[0].at("conflictive_degree").get<double>() > 0.95);
  }
  SUBCASE("bad input exits with 2") {
    CHECK(run_cli({"fuse"}, "{not json").code == ecml::cli::kExitUsage);
    CHECK(run_cli({"fuse"}, "").code == ecml::cli::kExitUsage);
    CHECK(run_cli({"fuse"}, R"({"evidence": [1, 2]} {"evidence": [1, 2, 3]})").code == ecml::cli::kExitUsage);
    CHECK(run_cli({"fuse"}, R"({"belief": [0.7, 0.7], "uncertainty": 0.1})").code == ecml::cli::kExitUsage);
  }
}

TEST_CASE("installed executable reports exit codes") {
  const std::string cli = ECML_CLI_PATH;
  const auto out = scratch("exe");
  fs::create_directories(out);
  const auto status = std::system((cli + " train " + (kFixtures / "malformed.cfg").string() + " > " +
                                   (out / "log").string() + " 2>&1")
                                      .c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == ecml::cli::kExitUsage);
  const auto fused = std::system(("echo '{\"evidence\": [1, 0]}' | " + cli + " fuse > " +
                                  (out / "fused.json").string())
                                     .c_str());
  REQUIRE(WIFEXITED(fused));
  CHECK(WEXITSTATUS(fused) == 0);
  CHECK(json::parse(slurp(out / "fused.json")).at("decision").at("label") == 0);
}
