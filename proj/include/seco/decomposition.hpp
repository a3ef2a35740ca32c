#pragma once

#include <vector>

#include "seco/grid.hpp"
#include "seco/rng.hpp"

namespace seco {

/// One cropped window: features and mask share the same origin and extent.
struct Patch {
  FeatureGrid features;
  PseudoMask mask;
  int origin_row = 0;
  int origin_col = 0;
};

struct PatchSet {
  int patch_height = 0;
  int patch_width = 0;
  std::vector<Patch> patches;
};

/// Row-major non-overlapping tiling; trailing remainder cells are dropped.
PatchSet decompose_grid(const FeatureGrid& features, const PseudoMask& mask, int h, int w);

/// count patches at uniformly sampled valid origins; overlap permitted.
PatchSet decompose_random(const FeatureGrid& features, const PseudoMask& mask, int h, int w,
                          int count, Rng& rng);

}  // namespace seco
