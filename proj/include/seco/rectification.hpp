#pragma once

#include <vector>

#include "seco/numerics.hpp"

namespace seco {

struct RectifyStats {
  double mean = 0.0;      // mean inner product with the positives
  int below_mean = 0;     // strictly below; ties do not count as noisy
  int positives = 0;
};

/// Mean inner product between the query and its positives.
double mean_positive_similarity(const Vec& query, const std::vector<Vec>& positives);

RectifyStats rectify_stats(const Vec& query, const std::vector<Vec>& positives);

/// Flip a foreground tag to uncertain (-1) when the fraction of positives
/// whose similarity falls strictly below the mean exceeds sigma. An empty
/// positive set is no evidence: the tag is kept.
int rectify_tag(const Vec& query, int tag, const std::vector<Vec>& positives, double sigma);

}  // namespace seco
