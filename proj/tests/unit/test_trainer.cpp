#include <cmath>
#include <sstream>

#include "doctest.h"
#include "seco/report.hpp"
#include "seco/trainer.hpp"

using namespace seco;

namespace {

Config tiny_config() {
  Config cfg;
  cfg.scenario.classes = 3;
  cfg.scenario.feature_dim = 8;
  cfg.scenario.embed_dim = 6;
  cfg.scenario.grid_height = 8;
  cfg.scenario.grid_width = 8;
  cfg.scenario.patch_height = 2;
  cfg.scenario.patch_width = 2;
  cfg.scenario.patches_per_image = 6;
  cfg.scenario.images_per_epoch = 24;
  cfg.scenario.eval_images = 8;
  cfg.scenario.cooccurrence = {{1, 2, 0.7}};
  cfg.scenario.seed = 3;
  cfg.hyper.hidden_dim = 8;
  cfg.hyper.reservoir_capacity = 128;
  cfg.hyper.epochs = 2;
  cfg.hyper.batch_size = 8;
  cfg.hyper.learning_rate = 0.2;
  return cfg;
}

std::string serialize(const TrainReport& report) {
  std::ostringstream out;
  out << report_header_json(report) << "\n" << evaluation_json(report.initial_eval) << "\n";
  for (const EpochRecord& record : report.records) out << epoch_record_json(record) << "\n";
  return out.str();
}

}  // namespace

TEST_CASE("zero epochs evaluates the initial state only") {
  Config cfg = tiny_config();
  cfg.hyper.epochs = 0;
  const TrainOutcome outcome = train(cfg);
  CHECK(outcome.report.records.empty());
  CHECK(outcome.report.initial_eval.seg.per_class.size() == 4);
  CHECK_FALSE(outcome.report.initial_eval.proto.has_value());  // bank never initialized
}

TEST_CASE("training is deterministic given config and seed") {
  const Config cfg = tiny_config();
  const TrainOutcome a = train(cfg);
  const TrainOutcome b = train(cfg);
  CHECK(serialize(a.report) == serialize(b.report));
  CHECK(a.student.encoder.flatten() == b.student.encoder.flatten());
  CHECK(a.teacher.values == b.teacher.values);
}

TEST_CASE("per-epoch records carry consistent counters and finite losses") {
  const Config cfg = tiny_config();
  const TrainOutcome outcome = train(cfg);
  REQUIRE(outcome.report.records.size() == 2);
  for (const EpochRecord& record : outcome.report.records) {
    const int total_tags =
        record.stats.tags_background + record.stats.tags_class + record.stats.tags_uncertain;
    CHECK(total_tags == cfg.scenario.images_per_epoch * cfg.scenario.patches_per_image);

    CHECK(record.reservoir_size <= cfg.hyper.reservoir_capacity);
    std::size_t occupancy_total = 0;
    for (const auto& [tag, count] : record.reservoir_occupancy) occupancy_total += count;
    CHECK(occupancy_total == record.reservoir_size);

    for (double value : {record.stats.cls, record.stats.cls_aux, record.stats.lig,
                         record.stats.lil, record.stats.seg, record.stats.total}) {
      CHECK(std::isfinite(value));
      CHECK(value >= 0.0);
    }
  }
}

TEST_CASE("prototypes end unit norm and the teacher tracks the student") {
  const Config cfg = tiny_config();
  const TrainOutcome outcome = train(cfg);
  for (int l = 1; l <= cfg.scenario.classes; ++l)
    if (outcome.bank.initialized(l))
      CHECK(std::abs(l2_norm(outcome.bank.prototype(l)) - 1.0) < 1e-9);
  CHECK(outcome.teacher.values.size() == outcome.student.encoder.flatten().size());
  CHECK(outcome.teacher.values != outcome.student.encoder.flatten());
}

TEST_CASE("zero contrast weights match disabled contrast flags") {
  Config zero_weights = tiny_config();
  zero_weights.hyper.alpha = 0.0;
  zero_weights.hyper.beta = 0.0;
  const TrainOutcome by_weights = train(zero_weights);

  TrainFlags flags;
  flags.disable_lig = true;
  flags.disable_lil = true;
  const TrainOutcome by_flags = train(tiny_config(), flags);

  CHECK(by_weights.student.encoder.flatten() == by_flags.student.encoder.flatten());
  CHECK(by_weights.student.seg_head == by_flags.student.seg_head);
  CHECK(by_weights.student.aux_head == by_flags.student.aux_head);
}

TEST_CASE("flags are echoed in the report header") {
  Config cfg = tiny_config();
  cfg.hyper.epochs = 0;
  TrainFlags flags;
  flags.disable_rectify = true;
  const TrainOutcome outcome = train(cfg, flags);
  const std::string header = report_header_json(outcome.report);
  CHECK(header.find("\"disable_rectify\":true") != std::string::npos);
  CHECK(header.find("\"disable_lig\":false") != std::string::npos);
}

TEST_CASE("evaluate matches the shapes of the scenario") {
  const Config cfg = tiny_config();
  const TrainOutcome outcome = train(cfg);
  const ScenarioSampler sampler(cfg.scenario);
  const Evaluation eval =
      evaluate(outcome.student, outcome.bank, sampler.heldout_set(), cfg);
  CHECK(eval.seg.per_class.size() == static_cast<std::size_t>(cfg.scenario.classes) + 1);
  CHECK(eval.seg.miou >= 0.0);
  CHECK(eval.seg.miou <= 1.0);
  if (eval.proto) {
    CHECK(eval.proto->per_class.size() == static_cast<std::size_t>(cfg.scenario.classes) + 1);
    CHECK_FALSE(eval.proto->per_class[0].iou.has_value());  // background never scored
  }
}
