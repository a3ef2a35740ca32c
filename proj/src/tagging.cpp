#include "seco/tagging.hpp"

#include <map>

namespace seco {

int assign_tag(const PseudoMask& mask_patch, double phi) {
  if (!(phi > 0.5 && phi <= 1.0))
    fail(Errc::invalid_threshold, "tag threshold must satisfy 0.5 < phi <= 1");

  std::map<int, int> counts;
  int considered = 0;
  for (int label : mask_patch.labels) {
    if (label == kIgnoreLabel) continue;
    ++counts[label];
    ++considered;
  }
  if (considered == 0) return kUncertainTag;

  for (const auto& [label, count] : counts)
    if (static_cast<double>(count) / considered >= phi) return label;
  return kUncertainTag;
}

std::vector<int> assign_tags(const PatchSet& patches, double phi) {
  std::vector<int> tags;
  tags.reserve(patches.patches.size());
  for (const Patch& patch : patches.patches) tags.push_back(assign_tag(patch.mask, phi));
  return tags;
}

}  // namespace seco
