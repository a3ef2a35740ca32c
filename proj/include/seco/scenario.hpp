#pragma once

#include <cstdint>
#include <vector>

#include "seco/grid.hpp"
#include "seco/numerics.hpp"
#include "seco/rng.hpp"

namespace seco {

/// A pair of classes that tend to appear together. strength is both the
/// fraction of either class's images that include the partner and the
/// magnitude of the shared confound direction added to both regions.
struct CoOccurrence {
  int class_a = 0;
  int class_b = 0;
  double strength = 0.0;
};

struct ScenarioConfig {
  int classes = 4;
  int embed_dim = 16;    // C
  int feature_dim = 16;  // D
  int grid_height = 12;
  int grid_width = 12;
  int patch_height = 3;
  int patch_width = 3;
  int patches_per_image = 12;
  int images_per_epoch = 200;
  int eval_images = 64;
  double feature_noise = 0.35;
  std::vector<CoOccurrence> cooccurrence;
  std::uint64_t seed = 7;
};

void validate(const ScenarioConfig& cfg);

struct LabeledImage {
  FeatureGrid features;
  PseudoMask ground_truth;  // true class per cell, no ignore labels
  std::vector<int> labels;  // sorted distinct classes present
};

/// Draws images whose foreground cells cluster around fixed unit centers,
/// one center per class; background cells cluster around a weaker background
/// center. Images of a co-occurring class carry the partner class in a
/// secondary region with probability strength, and both regions receive the
/// pair's shared confound vector scaled by strength. The confound overlaps
/// both class centers, the way shared context resembles its co-categories.
class ScenarioSampler {
 public:
  explicit ScenarioSampler(const ScenarioConfig& cfg);

  const ScenarioConfig& config() const { return cfg_; }
  const Mat& class_centers() const { return centers_; }
  const Vec& background_center() const { return background_; }
  const std::vector<Vec>& confounds() const { return confounds_; }

  std::vector<LabeledImage> sample(int count, Rng& rng) const;
  std::vector<LabeledImage> training_set() const;
  std::vector<LabeledImage> heldout_set() const;

 private:
  LabeledImage sample_image(int primary, Rng& rng) const;

  ScenarioConfig cfg_;
  Mat centers_;
  Vec background_;
  std::vector<Vec> confounds_;
};

/// Convenience wrapper: the deterministic training dataset for cfg.
std::vector<LabeledImage> generate_scenario(const ScenarioConfig& cfg);

}  // namespace seco
