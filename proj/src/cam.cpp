#include "seco/cam.hpp"

#include <algorithm>

namespace seco {
namespace {

void check_head_shape(const FeatureGrid& features, const Mat& head) {
  if (head.empty()) fail(Errc::shape_mismatch, "classifier head has no rows");
  for (const Vec& row : head)
    if (static_cast<int>(row.size()) != features.channels)
      fail(Errc::shape_mismatch, "head column count does not match feature channels");
}

}  // namespace

CamGrid compute_cam(const FeatureGrid& features, const Mat& head) {
  check_head_shape(features, head);
  const int classes = static_cast<int>(head.size());
  CamGrid cam(features.height, features.width, classes);
  for (int l = 1; l <= classes; ++l) {
    const Vec& row = head[l - 1];
    for (int r = 0; r < features.height; ++r)
      for (int c = 0; c < features.width; ++c)
        cam.score(l, r, c) = std::max(0.0, dot(row, features.cell(r, c)));
  }
  return cam;
}

Vec global_average_pool(const FeatureGrid& features) {
  Vec pooled(features.channels, 0.0);
  for (int r = 0; r < features.height; ++r)
    for (int c = 0; c < features.width; ++c) {
      auto cell = features.cell(r, c);
      for (int d = 0; d < features.channels; ++d) pooled[d] += cell[d];
    }
  const double inv = 1.0 / features.cells();
  for (double& x : pooled) x *= inv;
  return pooled;
}

Vec classifier_logits(const FeatureGrid& features, const Mat& head) {
  check_head_shape(features, head);
  const Vec pooled = global_average_pool(features);
  Vec logits(head.size());
  for (std::size_t l = 0; l < head.size(); ++l) logits[l] = dot(head[l], pooled);
  return logits;
}

PseudoMask cam_to_pseudo_mask(const CamGrid& cam, const std::vector<int>& image_labels,
                              double theta_low, double theta_high) {
  if (!(theta_low >= 0.0 && theta_low <= theta_high && theta_high <= 1.0))
    fail(Errc::invalid_threshold, "need 0 <= theta_low <= theta_high <= 1");

  // Candidates: present classes with a nonzero activation somewhere.
  struct Candidate {
    int label;
    double inv_max;
  };
  std::vector<Candidate> candidates;
  for (int label : image_labels) {
    if (label < 1 || label > cam.classes)
      fail(Errc::shape_mismatch, "image label outside 1..K");
    double top = 0.0;
    for (int r = 0; r < cam.height; ++r)
      for (int c = 0; c < cam.width; ++c) top = std::max(top, cam.score(label, r, c));
    if (top > 0.0) candidates.push_back({label, 1.0 / top});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.label < b.label; });

  PseudoMask mask(cam.height, cam.width, 0);
  if (candidates.empty()) return mask;  // nothing activates: all background

  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < cam.width; ++c) {
      int best_label = candidates.front().label;
      double best_score = 0.0;
      for (const Candidate& cand : candidates) {
        const double score = cam.score(cand.label, r, c) * cand.inv_max;
        if (score > best_score) {  // strict: ties keep the lowest label
          best_score = score;
          best_label = cand.label;
        }
      }
      if (best_score >= theta_high)
        mask.at(r, c) = best_label;
      else if (best_score < theta_low)
        mask.at(r, c) = 0;
      else
        mask.at(r, c) = kIgnoreLabel;
    }
  return mask;
}

}  // namespace seco
