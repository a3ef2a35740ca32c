#include "seco/decomposition.hpp"

#include <algorithm>

namespace seco {
namespace {

void check_crop(const FeatureGrid& features, const PseudoMask& mask, int h, int w) {
  if (h < 1 || w < 1 || h > features.height || w > features.width)
    fail(Errc::patch_larger_than_image, "patch extent exceeds grid");
  if (mask.height != features.height || mask.width != features.width)
    fail(Errc::mask_shape_mismatch, "mask dimensions differ from feature grid");
}

Patch crop(const FeatureGrid& features, const PseudoMask& mask, int r0, int c0, int h, int w) {
  Patch patch;
  patch.origin_row = r0;
  patch.origin_col = c0;
  patch.features = FeatureGrid(h, w, features.channels);
  patch.mask = PseudoMask(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      auto src = features.cell(r0 + r, c0 + c);
      auto dst = patch.features.cell(r, c);
      std::copy(src.begin(), src.end(), dst.begin());
      patch.mask.at(r, c) = mask.at(r0 + r, c0 + c);
    }
  return patch;
}

}  // namespace

PatchSet decompose_grid(const FeatureGrid& features, const PseudoMask& mask, int h, int w) {
  check_crop(features, mask, h, w);
  PatchSet set;
  set.patch_height = h;
  set.patch_width = w;
  for (int r0 = 0; r0 + h <= features.height; r0 += h)
    for (int c0 = 0; c0 + w <= features.width; c0 += w)
      set.patches.push_back(crop(features, mask, r0, c0, h, w));
  return set;
}

PatchSet decompose_random(const FeatureGrid& features, const PseudoMask& mask, int h, int w,
                          int count, Rng& rng) {
  check_crop(features, mask, h, w);
  if (count < 1) fail(Errc::invalid_config, "patch count must be >= 1");
  PatchSet set;
  set.patch_height = h;
  set.patch_width = w;
  for (int i = 0; i < count; ++i) {
    const int r0 = rng.uniform_int(0, features.height - h);
    const int c0 = rng.uniform_int(0, features.width - w);
    set.patches.push_back(crop(features, mask, r0, c0, h, w));
  }
  return set;
}

}  // namespace seco
