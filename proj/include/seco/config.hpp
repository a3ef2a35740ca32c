#pragma once

#include <cstdint>
#include <string>

#include "seco/scenario.hpp"

namespace seco {

struct Hyperparams {
  double phi = 0.9;            // patch tag proportion threshold
  double sigma = 0.6;          // rectification noisy-pair proportion
  int rectify_min_positives = 8;
  double eta = 0.9;            // prototype momentum
  double ema_momentum = 0.999; // local teacher momentum
  double tau_g = 0.5;          // patch-vs-prototype temperature
  double tau_l = 0.2;          // patch-vs-reservoir temperature
  double alpha = 0.5;
  double beta = 0.5;
  double gamma = 0.12;
  double theta_low = 0.25;
  double theta_high = 0.70;
  double epsilon_weak = 0.05;   // weak-view noise scale
  double epsilon_strong = 0.15; // strong-view noise scale
  double strong_dropout = 0.1;  // strong-view channel dropout rate
  double epsilon_shift = 0.0;   // strong-view shared-direction shift scale
  double learning_rate = 0.5;
  double weight_decay = 0.0;     // applied to encoder weight matrices only
  double center_momentum = 0.99; // projection-center EMA; 1 freezes the center
  bool cosine_decay = false;
  int batch_size = 8;
  int hidden_dim = 32;
  std::uint64_t reservoir_capacity = 4608;
  int epochs = 10;
};

struct Config {
  ScenarioConfig scenario;
  Hyperparams hyper;
};

struct TrainFlags {
  bool disable_lig = false;
  bool disable_lil = false;
  bool disable_rectify = false;
};

Config default_config();
void validate(const Config& cfg);

/// Serialize the full effective configuration.
std::string config_to_json(const Config& cfg);

/// Parse a (possibly partial) JSON document; absent fields keep their
/// defaults. A top-level "seed" key overrides scenario.seed.
Config config_from_json(const std::string& text);

Config load_config_file(const std::string& path);
void save_config_file(const std::string& path, const Config& cfg);

}  // namespace seco
