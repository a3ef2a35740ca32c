#include "seco/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace seco {

using nlohmann::json;

Config default_config() { return Config{}; }

void validate(const Config& cfg) {
  validate(cfg.scenario);
  const Hyperparams& hp = cfg.hyper;
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(Errc::invalid_config, what);
  };
  require(hp.phi > 0.5 && hp.phi <= 1.0, "phi must be in (0.5, 1]");
  require(hp.sigma > 0.0 && hp.sigma < 1.0, "sigma must be in (0, 1)");
  require(hp.rectify_min_positives >= 1, "rectify_min_positives must be >= 1");
  require(hp.eta >= 0.0 && hp.eta <= 1.0, "eta must be in [0, 1]");
  require(hp.ema_momentum >= 0.0 && hp.ema_momentum <= 1.0, "ema_momentum must be in [0, 1]");
  require(hp.tau_g > 0.0 && hp.tau_l > 0.0, "temperatures must be > 0");
  require(hp.alpha >= 0.0 && hp.beta >= 0.0 && hp.gamma >= 0.0,
          "loss weights must be nonnegative");
  require(hp.theta_low >= 0.0 && hp.theta_low <= hp.theta_high && hp.theta_high <= 1.0,
          "need 0 <= theta_low <= theta_high <= 1");
  require(hp.epsilon_weak >= 0.0 && hp.epsilon_strong >= 0.0 && hp.epsilon_shift >= 0.0,
          "noise scales must be >= 0");
  require(hp.strong_dropout >= 0.0 && hp.strong_dropout < 1.0, "dropout must be in [0, 1)");
  require(hp.learning_rate > 0.0, "learning_rate must be > 0");
  require(hp.weight_decay >= 0.0, "weight_decay must be >= 0");
  require(hp.center_momentum >= 0.0 && hp.center_momentum <= 1.0,
          "center_momentum must be in [0, 1]");
  require(hp.batch_size >= 1, "batch_size must be >= 1");
  require(hp.hidden_dim >= 1, "hidden_dim must be >= 1");
  require(hp.epochs >= 0, "epochs must be >= 0");
  require(hp.reservoir_capacity >=
              2 * static_cast<std::uint64_t>(hp.batch_size) * cfg.scenario.patches_per_image,
          "reservoir must hold both views of one batch");
}

namespace {

json scenario_to_json(const ScenarioConfig& sc) {
  json pairs = json::array();
  for (const CoOccurrence& pair : sc.cooccurrence)
    pairs.push_back({{"class_a", pair.class_a},
                     {"class_b", pair.class_b},
                     {"strength", pair.strength}});
  return {{"classes", sc.classes},
          {"embed_dim", sc.embed_dim},
          {"feature_dim", sc.feature_dim},
          {"grid_height", sc.grid_height},
          {"grid_width", sc.grid_width},
          {"patch_height", sc.patch_height},
          {"patch_width", sc.patch_width},
          {"patches_per_image", sc.patches_per_image},
          {"images_per_epoch", sc.images_per_epoch},
          {"eval_images", sc.eval_images},
          {"feature_noise", sc.feature_noise},
          {"cooccurrence", pairs},
          {"seed", sc.seed}};
}

json hyper_to_json(const Hyperparams& hp) {
  return {{"phi", hp.phi},
          {"sigma", hp.sigma},
          {"rectify_min_positives", hp.rectify_min_positives},
          {"eta", hp.eta},
          {"ema_momentum", hp.ema_momentum},
          {"tau_g", hp.tau_g},
          {"tau_l", hp.tau_l},
          {"alpha", hp.alpha},
          {"beta", hp.beta},
          {"gamma", hp.gamma},
          {"theta_low", hp.theta_low},
          {"theta_high", hp.theta_high},
          {"epsilon_weak", hp.epsilon_weak},
          {"epsilon_strong", hp.epsilon_strong},
          {"epsilon_shift", hp.epsilon_shift},
          {"strong_dropout", hp.strong_dropout},
          {"learning_rate", hp.learning_rate},
          {"weight_decay", hp.weight_decay},
          {"center_momentum", hp.center_momentum},
          {"cosine_decay", hp.cosine_decay},
          {"batch_size", hp.batch_size},
          {"hidden_dim", hp.hidden_dim},
          {"reservoir_capacity", hp.reservoir_capacity},
          {"epochs", hp.epochs}};
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

void overlay_scenario(const json& j, ScenarioConfig& sc) {
  read(j, "classes", sc.classes);
  read(j, "embed_dim", sc.embed_dim);
  read(j, "feature_dim", sc.feature_dim);
  read(j, "grid_height", sc.grid_height);
  read(j, "grid_width", sc.grid_width);
  read(j, "patch_height", sc.patch_height);
  read(j, "patch_width", sc.patch_width);
  read(j, "patches_per_image", sc.patches_per_image);
  read(j, "images_per_epoch", sc.images_per_epoch);
  read(j, "eval_images", sc.eval_images);
  read(j, "feature_noise", sc.feature_noise);
  read(j, "seed", sc.seed);
  if (j.contains("cooccurrence")) {
    sc.cooccurrence.clear();
    for (const json& p : j.at("cooccurrence")) {
      CoOccurrence pair;
      read(p, "class_a", pair.class_a);
      read(p, "class_b", pair.class_b);
      read(p, "strength", pair.strength);
      sc.cooccurrence.push_back(pair);
    }
  }
}

void overlay_hyper(const json& j, Hyperparams& hp) {
  read(j, "phi", hp.phi);
  read(j, "sigma", hp.sigma);
  read(j, "rectify_min_positives", hp.rectify_min_positives);
  read(j, "eta", hp.eta);
  read(j, "ema_momentum", hp.ema_momentum);
  read(j, "tau_g", hp.tau_g);
  read(j, "tau_l", hp.tau_l);
  read(j, "alpha", hp.alpha);
  read(j, "beta", hp.beta);
  read(j, "gamma", hp.gamma);
  read(j, "theta_low", hp.theta_low);
  read(j, "theta_high", hp.theta_high);
  read(j, "epsilon_weak", hp.epsilon_weak);
  read(j, "epsilon_strong", hp.epsilon_strong);
  read(j, "epsilon_shift", hp.epsilon_shift);
  read(j, "strong_dropout", hp.strong_dropout);
  read(j, "learning_rate", hp.learning_rate);
  read(j, "weight_decay", hp.weight_decay);
  read(j, "center_momentum", hp.center_momentum);
  read(j, "cosine_decay", hp.cosine_decay);
  read(j, "batch_size", hp.batch_size);
  read(j, "hidden_dim", hp.hidden_dim);
  read(j, "reservoir_capacity", hp.reservoir_capacity);
  read(j, "epochs", hp.epochs);
}

}  // namespace

std::string config_to_json(const Config& cfg) {
  const json j = {{"scenario", scenario_to_json(cfg.scenario)},
                  {"hyperparams", hyper_to_json(cfg.hyper)}};
  return j.dump(2);
}

Config config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  Config cfg = default_config();
  try {
    if (j.contains("scenario")) overlay_scenario(j.at("scenario"), cfg.scenario);
    if (j.contains("hyperparams")) overlay_hyper(j.at("hyperparams"), cfg.hyper);
    if (j.contains("seed")) cfg.scenario.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(Errc::invalid_config, std::string("config field has the wrong type: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::invalid_config, "cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str());
}

void save_config_file(const std::string& path, const Config& cfg) {
  std::ofstream out(path);
  if (!out) fail(Errc::invalid_config, "cannot write config file: " + path);
  out << config_to_json(cfg) << "\n";
}

}  // namespace seco
