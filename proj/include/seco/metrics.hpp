#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seco/grid.hpp"
#include "seco/numerics.hpp"
#include "seco/prototypes.hpp"

namespace seco {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

/// Raw counts per class 0..K, accumulated over the whole list (micro
/// aggregation). Ignored ground-truth cells are excluded.
std::vector<ConfusionCounts> accumulate_confusion(const std::vector<PseudoMask>& pred,
                                                  const std::vector<PseudoMask>& gt, int classes);

struct IouResult {
  std::vector<std::optional<double>> per_class;  // absent when the class never appears
  double mean = 0.0;
};

IouResult miou(const std::vector<PseudoMask>& pred, const std::vector<PseudoMask>& gt,
               int classes);

/// False positives over true positives for one class.
double confusion_ratio(const std::vector<PseudoMask>& pred, const std::vector<PseudoMask>& gt,
                       int label);

struct PrecisionRecall {
  std::optional<double> precision;
  std::optional<double> recall;
};

PrecisionRecall precision_recall(const std::vector<PseudoMask>& pred,
                                 const std::vector<PseudoMask>& gt, int label);

/// Row per embedding, column per class: cosine similarity to each prototype.
Mat patch_prototype_similarity(const std::vector<Vec>& embeddings, const PrototypeBank& bank);

}  // namespace seco
