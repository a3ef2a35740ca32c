#pragma once

#include <vector>

#include "seco/grid.hpp"
#include "seco/numerics.hpp"
#include "seco/reservoir.hpp"

namespace seco {

/// Scalar loss with per-query gradients. Gradients are taken with respect to
/// the query embeddings only; prototypes and reservoir keys are constants
/// within a step.
struct LossBundle {
  double value = 0.0;
  std::vector<Vec> query_grads;  // one per input query, zero where masked
  int positive_pairs = 0;
};

struct ScalarLoss {
  double value = 0.0;
  Vec grad;
};

struct CellLoss {
  double value = 0.0;
  std::vector<Vec> cell_grads;  // one per cell, zero on ignored cells
};

struct LossWeights {
  double alpha = 0.5;
  double beta = 0.5;
  double gamma = 0.12;
};

/// Patch-vs-prototype InfoNCE. Each query's positive is the candidate
/// prototype matching its tag; every candidate acts in the denominator. The
/// caller pre-filters background/uncertain queries.
LossBundle lig_loss(const std::vector<Vec>& queries, const std::vector<int>& query_tags,
                    const std::vector<int>& candidate_labels, const Mat& candidate_prototypes,
                    double tau);

/// Patch-vs-reservoir InfoNCE. Uncertain queries are masked out; positives
/// are same-tag entries and the denominator runs over every non-uncertain
/// entry. Queries without positives contribute nothing.
LossBundle lil_loss(const std::vector<Vec>& queries, const std::vector<int>& query_tags,
                    const TagReservoir& snapshot, double tau);

/// Mean binary cross-entropy over per-class sigmoid logits.
ScalarLoss multilabel_soft_margin(const Vec& logits, const std::vector<int>& targets);

/// Mean negative log softmax probability of the target label over the
/// non-ignored cells; an all-ignored mask yields zero.
CellLoss seg_cross_entropy(const Mat& cell_scores, const PseudoMask& target);

/// L = cls + cls_aux + alpha * lig + beta * lil + gamma * seg.
double seco_total(double cls, double cls_aux, double lig, double lil, double seg,
                  const LossWeights& weights);

}  // namespace seco
