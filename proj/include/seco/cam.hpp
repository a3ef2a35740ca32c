#pragma once

#include <vector>

#include "seco/grid.hpp"
#include "seco/numerics.hpp"

namespace seco {

/// Per-class activation map: score(l, cell) = relu(head_row_l . feature(cell)).
CamGrid compute_cam(const FeatureGrid& features, const Mat& head);

Vec global_average_pool(const FeatureGrid& features);

/// Image-level logits from the global-average-pooled feature vector.
Vec classifier_logits(const FeatureGrid& features, const Mat& head);

/// Threshold max-normalized activations into {background, class, ignore} cells.
/// Classes absent from image_labels are suppressed; a class whose map is all
/// zero contributes nothing. Per cell the best present class wins (ties to the
/// lowest index), then: score >= theta_high -> class, score < theta_low ->
/// background, otherwise ignore.
PseudoMask cam_to_pseudo_mask(const CamGrid& cam, const std::vector<int>& image_labels,
                              double theta_low, double theta_high);

}  // namespace seco
