#include "seco/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seco/tagging.hpp"

namespace seco {
namespace {

double log_sum_exp(std::span<const double> scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - top);
  return top + std::log(sum);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LossBundle lig_loss(const std::vector<Vec>& queries, const std::vector<int>& query_tags,
                    const std::vector<int>& candidate_labels, const Mat& candidate_prototypes,
                    double tau) {
  if (!(tau > 0.0)) fail(Errc::non_positive_temperature, "lig temperature must be > 0");
  if (queries.size() != query_tags.size())
    fail(Errc::length_mismatch, "query/tag counts differ");
  if (candidate_labels.size() != candidate_prototypes.size())
    fail(Errc::length_mismatch, "candidate label/prototype counts differ");

  LossBundle out;
  out.query_grads.assign(queries.size(), Vec());
  if (queries.empty()) return out;

  const std::size_t dim = queries.front().size();
  for (auto& grad : out.query_grads) grad.assign(dim, 0.0);

  const auto candidates = static_cast<int>(candidate_labels.size());
  double total = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    int positive = -1;
    for (int l = 0; l < candidates; ++l)
      if (candidate_labels[l] == query_tags[i]) positive = l;
    if (positive < 0)
      fail(Errc::missing_prototype,
           "no candidate prototype for tag " + std::to_string(query_tags[i]));

    Vec logits(candidates);
    for (int l = 0; l < candidates; ++l)
      logits[l] = dot(queries[i], candidate_prototypes[l]) / tau;
    const double lse = log_sum_exp(logits);
    total += lse - logits[positive];

    // d/dq [-log softmax(pos)] = sum_l (p_l - [l == pos]) P_l / tau
    const Vec probs = softmax(logits, 1.0);
    Vec& grad = out.query_grads[i];
    for (int l = 0; l < candidates; ++l) {
      const double coeff = (probs[l] - (l == positive ? 1.0 : 0.0)) / tau;
      const Vec& proto = candidate_prototypes[l];
      for (std::size_t d = 0; d < dim; ++d) grad[d] += coeff * proto[d];
    }
  }

  out.positive_pairs = static_cast<int>(queries.size());
  const double inv = 1.0 / out.positive_pairs;
  out.value = total * inv;
  for (auto& grad : out.query_grads)
    for (double& g : grad) g *= inv;
  return out;
}

LossBundle lil_loss(const std::vector<Vec>& queries, const std::vector<int>& query_tags,
                    const TagReservoir& snapshot, double tau) {
  if (!(tau > 0.0)) fail(Errc::non_positive_temperature, "lil temperature must be > 0");
  if (queries.size() != query_tags.size())
    fail(Errc::length_mismatch, "query/tag counts differ");

  LossBundle out;
  out.query_grads.assign(queries.size(), Vec());
  for (std::size_t i = 0; i < queries.size(); ++i)
    out.query_grads[i].assign(queries[i].size(), 0.0);
  if (queries.empty()) return out;

  // Denominator pool: every non-uncertain entry, in FIFO order.
  std::vector<const ReservoirEntry*> pool;
  for (const ReservoirEntry& entry : snapshot.entries())
    if (entry.tag != kUncertainTag) pool.push_back(&entry);
  if (pool.empty()) return out;

  struct PerQuery {
    double sum = 0.0;       // sum over positives of (lse - s_+)
    Vec grad;               // unscaled gradient
    int pairs = 0;
  };
  std::vector<PerQuery> partials(queries.size());

  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (query_tags[i] == kUncertainTag) continue;  // rectification mask

    Vec logits(pool.size());
    int pairs = 0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      logits[k] = dot(queries[i], pool[k]->embedding) / tau;
      if (pool[k]->tag == query_tags[i]) ++pairs;
    }
    if (pairs == 0) continue;

    const double lse = log_sum_exp(logits);
    const Vec probs = softmax(logits, 1.0);

    PerQuery& part = partials[i];
    part.pairs = pairs;
    part.grad.assign(queries[i].size(), 0.0);

    Vec weighted(queries[i].size(), 0.0);  // sum_k p_k * k
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const Vec& key = pool[k]->embedding;
      for (std::size_t d = 0; d < key.size(); ++d) weighted[d] += probs[k] * key[d];
      if (pool[k]->tag == query_tags[i]) {
        part.sum += lse - logits[k];
        for (std::size_t d = 0; d < key.size(); ++d) part.grad[d] -= key[d] / tau;
      }
    }
    for (std::size_t d = 0; d < weighted.size(); ++d)
      part.grad[d] += pairs * weighted[d] / tau;
  }

  int total_pairs = 0;
  for (const PerQuery& part : partials) total_pairs += part.pairs;
  if (total_pairs == 0) return out;

  const double inv = 1.0 / total_pairs;
  double total = 0.0;
  for (std::size_t i = 0; i < partials.size(); ++i) {
    total += partials[i].sum;
    if (partials[i].pairs > 0)
      for (std::size_t d = 0; d < out.query_grads[i].size(); ++d)
        out.query_grads[i][d] = partials[i].grad[d] * inv;
  }
  out.value = total * inv;
  out.positive_pairs = total_pairs;
  return out;
}

ScalarLoss multilabel_soft_margin(const Vec& logits, const std::vector<int>& targets) {
  if (logits.size() != targets.size()) fail(Errc::length_mismatch, "logit/target counts differ");
  if (logits.empty()) fail(Errc::empty_input, "no logits");

  ScalarLoss out;
  out.grad.assign(logits.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(logits.size());
  for (std::size_t l = 0; l < logits.size(); ++l) {
    if (targets[l] != 0 && targets[l] != 1)
      fail(Errc::shape_mismatch, "targets must be binary");
    // y log(sigmoid) + (1-y) log(1-sigmoid), in softplus form for stability
    out.value += inv * (targets[l] == 1 ? softplus(-logits[l]) : softplus(logits[l]));
    out.grad[l] = inv * (sigmoid(logits[l]) - targets[l]);
  }
  return out;
}

CellLoss seg_cross_entropy(const Mat& cell_scores, const PseudoMask& target) {
  const std::size_t cells = static_cast<std::size_t>(target.height) * target.width;
  if (cell_scores.size() != cells)
    fail(Errc::shape_mismatch, "score rows do not cover the mask cells");

  CellLoss out;
  out.cell_grads.assign(cells, Vec());

  std::size_t valid = 0;
  for (std::size_t i = 0; i < cells; ++i)
    if (target.labels[i] != kIgnoreLabel) ++valid;

  for (std::size_t i = 0; i < cells; ++i) {
    out.cell_grads[i].assign(cell_scores[i].size(), 0.0);
    const int label = target.labels[i];
    if (label == kIgnoreLabel) continue;
    if (label < 0 || label >= static_cast<int>(cell_scores[i].size()))
      fail(Errc::shape_mismatch, "mask label outside the score range");

    Vec scaled(cell_scores[i]);
    const double lse = log_sum_exp(scaled);
    out.value += (lse - scaled[label]) / valid;

    const Vec probs = softmax(scaled, 1.0);
    for (std::size_t l = 0; l < probs.size(); ++l)
      out.cell_grads[i][l] = (probs[l] - (static_cast<int>(l) == label ? 1.0 : 0.0)) / valid;
  }
  return out;
}

double seco_total(double cls, double cls_aux, double lig, double lil, double seg,
                  const LossWeights& weights) {
  if (!(weights.alpha >= 0.0 && weights.beta >= 0.0 && weights.gamma >= 0.0))
    fail(Errc::invalid_config, "loss weights must be nonnegative");
  const double parts[] = {cls, cls_aux, lig, lil, seg};
  for (double part : parts)
    if (!std::isfinite(part)) fail(Errc::non_finite_component, "loss component is not finite");
  return cls + cls_aux + weights.alpha * lig + weights.beta * lil + weights.gamma * seg;
}

}  // namespace seco
