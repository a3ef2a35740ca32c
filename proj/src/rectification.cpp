#include "seco/rectification.hpp"

#include "seco/tagging.hpp"

namespace seco {

double mean_positive_similarity(const Vec& query, const std::vector<Vec>& positives) {
  if (positives.empty()) fail(Errc::no_positives, "mean similarity over an empty positive set");
  double sum = 0.0;
  for (const Vec& positive : positives) sum += dot(query, positive);
  return sum / static_cast<double>(positives.size());
}

RectifyStats rectify_stats(const Vec& query, const std::vector<Vec>& positives) {
  RectifyStats stats;
  stats.positives = static_cast<int>(positives.size());
  if (positives.empty()) return stats;
  stats.mean = mean_positive_similarity(query, positives);
  for (const Vec& positive : positives)
    if (dot(query, positive) < stats.mean) ++stats.below_mean;
  return stats;
}

int rectify_tag(const Vec& query, int tag, const std::vector<Vec>& positives, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0))
    fail(Errc::invalid_threshold, "rectification sigma must be in (0,1)");
  if (!is_foreground_tag(tag))
    fail(Errc::invalid_threshold, "rectification applies to foreground tags only");
  if (positives.empty()) return tag;
  const RectifyStats stats = rectify_stats(query, positives);
  const double ratio = static_cast<double>(stats.below_mean) / stats.positives;
  return ratio > sigma ? kUncertainTag : tag;
}

}  // namespace seco
