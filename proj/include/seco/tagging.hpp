#pragma once

#include <vector>

#include "seco/decomposition.hpp"
#include "seco/grid.hpp"

namespace seco {

/// Category tags: 0 background, 1..K single class, -1 uncertain.
inline constexpr int kBackgroundTag = 0;
inline constexpr int kUncertainTag = -1;

inline bool is_foreground_tag(int tag) { return tag >= 1; }

/// Tag from the label fractions of a mask patch. A label must reach fraction
/// phi among the non-ignored cells to claim the patch; anything less, or an
/// all-ignored patch, is uncertain. phi > 0.5 keeps the winner unique.
int assign_tag(const PseudoMask& mask_patch, double phi);

std::vector<int> assign_tags(const PatchSet& patches, double phi);

}  // namespace seco
