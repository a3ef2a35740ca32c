#include "seco/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seco {
namespace {

constexpr std::uint64_t kCenterStream = 0x5ec0c311;
constexpr std::uint64_t kTrainStream = 0x5ec0c312;
constexpr std::uint64_t kEvalStream = 0x5ec0c313;

// Background cells carry a weaker but consistent appearance.
constexpr double kBackgroundScale = 0.5;

Vec random_unit(int dim, Rng& rng) {
  Vec v(dim);
  for (double& x : v) x = rng.normal();
  return l2_normalize(v);
}

struct Region {
  int top, left, height, width;
  bool contains(int r, int c) const {
    return r >= top && r < top + height && c >= left && c < left + width;
  }
};

}  // namespace

void validate(const ScenarioConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(Errc::invalid_config, what);
  };
  require(cfg.classes >= 1, "classes must be >= 1");
  require(cfg.embed_dim >= 1 && cfg.feature_dim >= 1, "dimensions must be >= 1");
  require(cfg.grid_height >= 1 && cfg.grid_width >= 1, "grid must be nonempty");
  require(cfg.patch_height >= 1 && cfg.patch_height <= cfg.grid_height &&
              cfg.patch_width >= 1 && cfg.patch_width <= cfg.grid_width,
          "patch extent must fit the grid");
  require(cfg.patches_per_image >= 1, "patches_per_image must be >= 1");
  require(cfg.images_per_epoch >= 1, "images_per_epoch must be >= 1");
  require(cfg.eval_images >= 1, "eval_images must be >= 1");
  require(cfg.feature_noise >= 0.0, "feature_noise must be >= 0");

  std::vector<int> used;
  for (const CoOccurrence& pair : cfg.cooccurrence) {
    require(pair.class_a >= 1 && pair.class_a <= cfg.classes && pair.class_b >= 1 &&
                pair.class_b <= cfg.classes,
            "co-occurrence pair references an unknown class");
    require(pair.class_a != pair.class_b, "co-occurrence pair must use distinct classes");
    require(pair.strength >= 0.0 && pair.strength <= 1.0,
            "co-occurrence strength must be in [0,1]");
    for (int cls : {pair.class_a, pair.class_b}) {
      require(std::find(used.begin(), used.end(), cls) == used.end(),
              "a class may appear in at most one co-occurrence pair");
      used.push_back(cls);
    }
  }
}

ScenarioSampler::ScenarioSampler(const ScenarioConfig& cfg) : cfg_(cfg) {
  validate(cfg);
  Rng rng(cfg.seed, kCenterStream);
  centers_.reserve(cfg.classes + 1);
  for (int l = 0; l <= cfg.classes; ++l) centers_.push_back(random_unit(cfg.feature_dim, rng));

  // Orthonormal centers keep class separability independent of the seed.
  if (cfg.feature_dim >= cfg.classes + 1) {
    for (int i = 0; i <= cfg.classes; ++i) {
      for (int j = 0; j < i; ++j) {
        const double overlap = dot(centers_[i], centers_[j]);
        for (int d = 0; d < cfg.feature_dim; ++d) centers_[i][d] -= overlap * centers_[j][d];
      }
      centers_[i] = l2_normalize(centers_[i]);
    }
  }
  background_ = centers_.back();
  centers_.pop_back();

  // One shared context direction per pair, distinct from any class center.
  confounds_.reserve(cfg.cooccurrence.size());
  for (std::size_t p = 0; p < cfg.cooccurrence.size(); ++p)
    confounds_.push_back(random_unit(cfg.feature_dim, rng));
}

LabeledImage ScenarioSampler::sample_image(int primary, Rng& rng) const {
  const int grid_h = cfg_.grid_height;
  const int grid_w = cfg_.grid_width;

  int partner = 0;
  const Vec* confound = nullptr;
  double strength = 0.0;
  for (std::size_t p = 0; p < cfg_.cooccurrence.size(); ++p) {
    const CoOccurrence& pair = cfg_.cooccurrence[p];
    if (pair.class_a != primary && pair.class_b != primary) continue;
    if (rng.uniform01() < pair.strength) {
      partner = pair.class_a == primary ? pair.class_b : pair.class_a;
      confound = &confounds_[p];
      strength = pair.strength;
    }
    break;  // a class belongs to at most one pair
  }

  Region primary_region{};
  Region partner_region{0, 0, 0, 0};
  if (partner == 0) {
    // One dominant rectangle, remainder background.
    const int rh = std::clamp(static_cast<int>(std::lround(grid_h * rng.uniform(0.70, 0.90))),
                              1, grid_h);
    const int rw = std::clamp(static_cast<int>(std::lround(grid_w * rng.uniform(0.70, 0.90))),
                              1, grid_w);
    primary_region = {rng.uniform_int(0, grid_h - rh), rng.uniform_int(0, grid_w - rw), rh, rw};
  } else {
    // Asymmetric split: the primary class dominates, the partner is a strip.
    const bool vertical = rng.uniform01() < 0.5;
    const int extent = vertical ? grid_w : grid_h;
    const int split =
        std::clamp(static_cast<int>(std::lround(extent * rng.uniform(0.90, 0.97))), 1, extent - 1);
    if (vertical) {
      primary_region = {0, 0, grid_h, split};
      partner_region = {0, split, grid_h, grid_w - split};
    } else {
      primary_region = {0, 0, split, grid_w};
      partner_region = {split, 0, grid_h - split, grid_w};
    }
  }

  LabeledImage image;
  image.features = FeatureGrid(grid_h, grid_w, cfg_.feature_dim);
  image.ground_truth = PseudoMask(grid_h, grid_w, 0);
  for (int r = 0; r < grid_h; ++r)
    for (int c = 0; c < grid_w; ++c) {
      int label = 0;
      if (primary_region.contains(r, c))
        label = primary;
      else if (partner != 0 && partner_region.contains(r, c))
        label = partner;
      image.ground_truth.at(r, c) = label;

      auto cell = image.features.cell(r, c);
      for (int d = 0; d < cfg_.feature_dim; ++d) {
        cell[d] = cfg_.feature_noise * rng.normal();
        if (label == 0) {
          cell[d] += kBackgroundScale * background_[d];
        } else {
          cell[d] += centers_[label - 1][d];
          if (confound) cell[d] += strength * (*confound)[d];
        }
      }
    }

  image.labels.push_back(primary);
  if (partner != 0) image.labels.push_back(partner);
  std::sort(image.labels.begin(), image.labels.end());
  return image;
}

std::vector<LabeledImage> ScenarioSampler::sample(int count, Rng& rng) const {
  std::vector<LabeledImage> images;
  images.reserve(count);
  for (int i = 0; i < count; ++i) images.push_back(sample_image(1 + i % cfg_.classes, rng));
  return images;
}

std::vector<LabeledImage> ScenarioSampler::training_set() const {
  Rng rng(cfg_.seed, kTrainStream);
  return sample(cfg_.images_per_epoch, rng);
}

std::vector<LabeledImage> ScenarioSampler::heldout_set() const {
  Rng rng(cfg_.seed, kEvalStream);
  return sample(cfg_.eval_images, rng);
}

std::vector<LabeledImage> generate_scenario(const ScenarioConfig& cfg) {
  return ScenarioSampler(cfg).training_set();
}

}  // namespace seco
