// Exercises the command-line contract: exit codes, flags, and file outputs.
// Usage: cli_contract --cli <path-to-seco> --work <scratch-dir>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "seco/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

#define REQUIRE_MSG(cond, msg)                                             \
  do {                                                                     \
    if (!(cond)) {                                                         \
      std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg \
                << "\n";                                                   \
      ++failures;                                                          \
    }                                                                      \
  } while (0)

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& command) {
  const std::string capture = command + " 2>&1";
  FILE* pipe = popen(capture.c_str(), "r");
  RunResult result;
  if (!pipe) return result;
  char buffer[4096];
  while (fgets(buffer, sizeof(buffer), pipe)) result.output += buffer;
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  std::string work;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--cli") cli = argv[i + 1];
    if (key == "--work") work = argv[i + 1];
  }
  if (cli.empty() || work.empty()) {
    std::cerr << "usage: cli_contract --cli <seco> --work <dir>\n";
    return 2;
  }
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path root(work);

  // Missing arguments and unknown files exit 2 with a usage hint.
  REQUIRE_MSG(run(cli + " train").exit_code == 2, "train without --config must exit 2");
  REQUIRE_MSG(run(cli + " train --config /nope.json --out " + (root / "x").string()).exit_code ==
                  2,
              "unreadable config must exit 2");
  REQUIRE_MSG(run(cli).exit_code == 2, "no subcommand must exit 2");
  REQUIRE_MSG(run(cli + " --help").exit_code == 0, "--help exits 0");

  // A tiny but complete training run.
  seco::Config cfg;
  cfg.scenario.classes = 3;
  cfg.scenario.feature_dim = 8;
  cfg.scenario.embed_dim = 6;
  cfg.scenario.grid_height = 8;
  cfg.scenario.grid_width = 8;
  cfg.scenario.patch_height = 2;
  cfg.scenario.patch_width = 2;
  cfg.scenario.patches_per_image = 6;
  cfg.scenario.images_per_epoch = 16;
  cfg.scenario.eval_images = 8;
  cfg.scenario.seed = 11;
  cfg.hyper.hidden_dim = 8;
  cfg.hyper.reservoir_capacity = 128;
  cfg.hyper.epochs = 2;
  const fs::path config_path = root / "config.json";
  seco::save_config_file(config_path.string(), cfg);

  const fs::path out_a = root / "run_a";
  const RunResult train_a =
      run(cli + " train --config " + config_path.string() + " --out " + out_a.string());
  REQUIRE_MSG(train_a.exit_code == 0, "tiny train run must succeed: " << train_a.output);
  REQUIRE_MSG(fs::exists(out_a / "report.jsonl"), "train writes report.jsonl");
  REQUIRE_MSG(fs::exists(out_a / "snapshot.json"), "train writes snapshot.json");
  REQUIRE_MSG(fs::exists(out_a / "effective_config.json"), "train echoes the config");

  // Two epoch records plus header plus initial evaluation.
  {
    std::ifstream report(out_a / "report.jsonl");
    std::string line;
    int lines = 0, epochs = 0;
    while (std::getline(report, line)) {
      ++lines;
      const json j = json::parse(line);
      if (j.at("type") == "epoch" && j.at("epoch").get<int>() > 0) ++epochs;
      if (lines == 1) REQUIRE_MSG(j.at("type") == "header", "first line is the header");
    }
    REQUIRE_MSG(epochs == 2, "expected 2 epoch records, saw " << epochs);
  }

  // Ablation flags are accepted and echoed.
  const fs::path out_flags = root / "run_flags";
  const RunResult train_flags =
      run(cli + " train --config " + config_path.string() + " --out " + out_flags.string() +
          " --disable-lig --disable-lil");
  REQUIRE_MSG(train_flags.exit_code == 0, "ablation run must succeed");
  {
    std::ifstream report(out_flags / "report.jsonl");
    std::string header_line;
    std::getline(report, header_line);
    const json header = json::parse(header_line);
    REQUIRE_MSG(header.at("flags").at("disable_lig").get<bool>(), "disable_lig echoed");
    REQUIRE_MSG(header.at("flags").at("disable_lil").get<bool>(), "disable_lil echoed");
  }

  // --seed overrides and is reflected in the effective config.
  const fs::path out_seed = root / "run_seed";
  const RunResult train_seed = run(cli + " train --config " + config_path.string() + " --out " +
                                   out_seed.string() + " --seed 777");
  REQUIRE_MSG(train_seed.exit_code == 0, "seed override run must succeed");
  {
    const json echoed = json::parse(read_file(out_seed / "effective_config.json"));
    REQUIRE_MSG(echoed.at("scenario").at("seed").get<std::uint64_t>() == 777,
                "seed override echoed");
  }

  // eval --json prints one JSON object matching the final epoch record.
  const RunResult eval_json =
      run(cli + " eval --snapshot " + (out_a / "snapshot.json").string() + " --config " +
          (out_a / "effective_config.json").string() + " --json");
  REQUIRE_MSG(eval_json.exit_code == 0, "eval must succeed: " << eval_json.output);
  {
    const json eval = json::parse(eval_json.output);
    std::ifstream report(out_a / "report.jsonl");
    std::string line, last;
    while (std::getline(report, line))
      if (!line.empty()) last = line;
    const json final_record = json::parse(last);
    REQUIRE_MSG(eval == final_record.at("eval"),
                "eval output must equal the final epoch evaluation");
  }

  // Plain eval prints a table.
  const RunResult eval_table =
      run(cli + " eval --snapshot " + (out_a / "snapshot.json").string() + " --config " +
          (out_a / "effective_config.json").string());
  REQUIRE_MSG(eval_table.exit_code == 0, "table eval must succeed");
  REQUIRE_MSG(eval_table.output.find("segmentation route") != std::string::npos,
              "table eval prints the segmentation route");

  // Corrupted snapshots exit 3.
  const fs::path broken = root / "broken_snapshot.json";
  {
    std::ofstream out(broken);
    out << "{\"version\": 999, \"garbage\": true}";
  }
  REQUIRE_MSG(run(cli + " eval --snapshot " + broken.string() + " --config " +
                  config_path.string())
                      .exit_code == 3,
              "corrupted snapshot must exit 3");

  // dump-similarity produces a CSV with one row per class.
  const fs::path csv = root / "similarity.csv";
  const RunResult dump =
      run(cli + " dump-similarity --snapshot " + (out_a / "snapshot.json").string() + " --out " +
          csv.string());
  REQUIRE_MSG(dump.exit_code == 0, "dump-similarity must succeed: " << dump.output);
  {
    std::ifstream in(csv);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    REQUIRE_MSG(rows == cfg.scenario.classes + 1, "csv has a header plus K rows");
  }

  // selftest passes clean and fails loudly under fault injection.
  const RunResult selftest = run(cli + " selftest");
  REQUIRE_MSG(selftest.exit_code == 0, "selftest must pass: " << selftest.output);
  REQUIRE_MSG(selftest.output.find("lig_loss") != std::string::npos,
              "selftest reports per-check names");

  const RunResult injected = run(cli + " selftest --inject-fault lig_loss");
  REQUIRE_MSG(injected.exit_code == 1, "injected fault must exit 1");
  REQUIRE_MSG(injected.output.find("selftest failed: lig_loss") != std::string::npos,
              "injected fault names lig_loss");

  if (failures == 0) {
    std::cout << "cli_contract: all checks passed\n";
    return 0;
  }
  std::cerr << "cli_contract: " << failures << " check(s) failed\n";
  return 1;
}
