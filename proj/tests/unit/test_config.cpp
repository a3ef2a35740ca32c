#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "seco/config.hpp"
#include "seco/snapshot.hpp"

using namespace seco;

TEST_CASE("default config carries the standard constants") {
  const Config cfg = default_config();
  CHECK(cfg.scenario.patches_per_image == 12);
  CHECK(cfg.hyper.reservoir_capacity == 4608);
  CHECK(cfg.hyper.alpha == doctest::Approx(0.5));
  CHECK(cfg.hyper.beta == doctest::Approx(0.5));
  CHECK(cfg.hyper.gamma == doctest::Approx(0.12));
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("partial JSON overlays onto defaults") {
  const Config cfg = config_from_json(R"({
    "scenario": {"classes": 3, "seed": 99,
                 "cooccurrence": [{"class_a": 1, "class_b": 2, "strength": 0.8}]},
    "hyperparams": {"epochs": 2, "tau_l": 0.3}
  })");
  CHECK(cfg.scenario.classes == 3);
  CHECK(cfg.scenario.seed == 99);
  CHECK(cfg.scenario.patches_per_image == 12);  // untouched default
  CHECK(cfg.hyper.epochs == 2);
  CHECK(cfg.hyper.tau_l == doctest::Approx(0.3));
  CHECK(cfg.hyper.tau_g == doctest::Approx(0.5));
  REQUIRE(cfg.scenario.cooccurrence.size() == 1);
  CHECK(cfg.scenario.cooccurrence[0].strength == doctest::Approx(0.8));
}

TEST_CASE("top-level seed key wins") {
  const Config cfg = config_from_json(R"({"scenario": {"seed": 5}, "seed": 17})");
  CHECK(cfg.scenario.seed == 17);
}

TEST_CASE("config serialization round trips") {
  Config cfg = default_config();
  cfg.scenario.classes = 6;
  cfg.scenario.cooccurrence = {{2, 5, 0.9}};
  cfg.hyper.learning_rate = 0.125;
  const Config back = config_from_json(config_to_json(cfg));
  CHECK(back.scenario.classes == 6);
  CHECK(back.scenario.cooccurrence[0].class_b == 5);
  CHECK(back.hyper.learning_rate == doctest::Approx(0.125));
}

TEST_CASE("broken configs raise InvalidConfig") {
  try {
    config_from_json("not json at all");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_config);
  }
  try {
    config_from_json(R"({"hyperparams": {"phi": 0.3}})");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_config);
  }
  try {
    load_config_file("/nonexistent/config.json");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_config);
  }
}

TEST_CASE("snapshot save and load round trip") {
  Config cfg = default_config();
  cfg.scenario.classes = 2;
  cfg.scenario.feature_dim = 4;
  cfg.scenario.embed_dim = 3;
  cfg.hyper.hidden_dim = 4;

  Rng rng(404);
  StudentState student = StudentState::init(cfg, rng);
  EmaParams teacher{student.encoder.flatten(), 0.99};
  PrototypeBank bank(2, 3);
  bank.set_prototype(1, l2_normalize(Vec{1.0, 2.0, -1.0}));

  const std::string path = "test_snapshot_roundtrip.json";
  save_snapshot(path, {cfg, student, teacher, bank});
  const Snapshot loaded = load_snapshot(path);
  CHECK(loaded.student.encoder.flatten() == student.encoder.flatten());
  CHECK(loaded.student.seg_head == student.seg_head);
  CHECK(loaded.teacher.values == teacher.values);
  CHECK(loaded.bank.initialized(1));
  CHECK_FALSE(loaded.bank.initialized(2));
  CHECK(loaded.bank.prototype(1) == bank.prototype(1));
  CHECK(loaded.config.scenario.classes == 2);
  std::remove(path.c_str());
}

TEST_CASE("corrupt or mismatched snapshots raise BadSnapshot") {
  const std::string path = "test_snapshot_bad.json";
  {
    std::ofstream out(path);
    out << "{\"version\": 999}";
  }
  try {
    load_snapshot(path);
    FAIL("expected BadSnapshot");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_snapshot);
  }
  {
    std::ofstream out(path);
    out << "garbage{{{";
  }
  try {
    load_snapshot(path);
    FAIL("expected BadSnapshot");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_snapshot);
  }
  std::remove(path.c_str());

  try {
    load_snapshot("/nonexistent/snapshot.json");
    FAIL("expected BadSnapshot");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_snapshot);
  }
}
