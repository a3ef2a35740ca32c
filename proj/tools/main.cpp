#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "seco/report.hpp"
#include "seco/selftest.hpp"
#include "seco/snapshot.hpp"
#include "seco/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSelftestFailure = 1;
constexpr int kExitBadArguments = 2;
constexpr int kExitBadSnapshot = 3;

std::string format_cell(const std::optional<double>& value) {
  if (!value) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << *value;
  return out.str();
}

void print_route(std::ostream& out, const std::string& name, const seco::RouteEval& route) {
  out << name << " route  (mIoU " << std::fixed << std::setprecision(4) << route.miou << ")\n";
  out << "  class      iou  confusion  precision  recall\n";
  for (const seco::EvalClassRow& row : route.per_class) {
    if (!row.iou && !row.precision && !row.recall && !row.confusion) continue;
    out << "  " << std::setw(5) << row.label << " " << std::setw(8) << format_cell(row.iou)
        << " " << std::setw(10) << format_cell(row.confusion) << " " << std::setw(10)
        << format_cell(row.precision) << " " << std::setw(7) << format_cell(row.recall) << "\n";
  }
}

int run_train(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, const seco::TrainFlags& flags) {
  seco::Config cfg = seco::load_config_file(config_path);
  if (seed) cfg.scenario.seed = *seed;

  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  const seco::TrainOutcome outcome = seco::train(cfg, flags);
  seco::write_report_jsonl((out / "report.jsonl").string(), outcome.report);
  seco::save_config_file((out / "effective_config.json").string(), cfg);
  if (outcome.report.final_similarity)
    seco::write_similarity_csv((out / "similarity_final.csv").string(),
                               *outcome.report.final_similarity);
  seco::save_snapshot((out / "snapshot.json").string(),
                      {cfg, outcome.student, outcome.teacher, outcome.bank});

  std::cout << "wrote " << (out / "report.jsonl").string() << " ("
            << outcome.report.records.size() << " epoch records)\n";
  return kExitOk;
}

int run_eval(const std::string& snapshot_path, const std::string& config_path, bool as_json) {
  const seco::Snapshot snapshot = seco::load_snapshot(snapshot_path);
  const seco::Config cfg = seco::load_config_file(config_path);

  const seco::ScenarioSampler sampler(cfg.scenario);
  const seco::Evaluation eval =
      seco::evaluate(snapshot.student, snapshot.bank, sampler.heldout_set(), cfg);

  if (as_json) {
    std::cout << seco::evaluation_json(eval) << "\n";
    return kExitOk;
  }
  print_route(std::cout, "segmentation", eval.seg);
  if (eval.proto)
    print_route(std::cout, "nearest-prototype", *eval.proto);
  else
    std::cout << "nearest-prototype route unavailable (bank not fully initialized)\n";
  return kExitOk;
}

int run_dump_similarity(const std::string& snapshot_path, const std::string& out_path) {
  const seco::Snapshot snapshot = seco::load_snapshot(snapshot_path);
  if (!snapshot.bank.all_initialized()) {
    std::cerr << "error: snapshot bank is not fully initialized\n";
    return kExitBadSnapshot;
  }
  seco::write_similarity_csv(out_path, seco::similarity_matrix(snapshot.bank));
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-occurrence decoupling experiments: tagged patch contrast on synthetic grids"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_value = 0;
  seco::TrainFlags flags;
  CLI::App* train = app.add_subcommand("train", "train on a scenario config");
  train->add_option("--config", config_path, "config JSON path")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  CLI::Option* seed_opt = train->add_option("--seed", seed_value, "override the config seed");
  train->add_flag("--disable-lig", flags.disable_lig, "drop the patch-vs-prototype loss");
  train->add_flag("--disable-lil", flags.disable_lil, "drop the patch-vs-reservoir loss");
  train->add_flag("--disable-rectify", flags.disable_rectify, "skip tag rectification");

  std::string snapshot_path;
  std::string eval_config;
  bool as_json = false;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a snapshot on its held-out split");
  eval->add_option("--snapshot", snapshot_path, "snapshot JSON path")->required();
  eval->add_option("--config", eval_config, "config JSON path")->required();
  eval->add_flag("--json", as_json, "emit one JSON object");

  std::string fault;
  CLI::App* selftest = app.add_subcommand("selftest", "gradient and oracle self-checks");
  selftest->add_option("--inject-fault", fault, "perturb a named check (harness test hook)")
      ->group("");  // hidden

  std::string dump_snapshot;
  std::string dump_out;
  CLI::App* dump = app.add_subcommand("dump-similarity", "prototype similarity matrix to CSV");
  dump->add_option("--snapshot", dump_snapshot, "snapshot JSON path")->required();
  dump->add_option("--out", dump_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadArguments;
  }

  try {
    if (*train)
      return run_train(config_path, out_dir,
                       seed_opt->count() ? std::optional<std::uint64_t>(seed_value) : std::nullopt,
                       flags);
    if (*eval) return run_eval(snapshot_path, eval_config, as_json);
    if (*selftest) {
      const auto results = seco::run_selftest(std::cout, 20, fault);
      if (seco::all_passed(results)) return kExitOk;
      for (const seco::CheckResult& result : results)
        if (!result.passed) std::cerr << "selftest failed: " << result.name << "\n";
      return kExitSelftestFailure;
    }
    if (*dump) return run_dump_similarity(dump_snapshot, dump_out);
  } catch (const seco::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == seco::Errc::bad_snapshot ? kExitBadSnapshot : kExitBadArguments;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArguments;
  }
  return kExitBadArguments;
}
