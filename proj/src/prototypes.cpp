#include "seco/prototypes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seco {

PrototypeBank::PrototypeBank(int classes, int dim) : dim_(dim) {
  if (classes < 1 || dim < 1) fail(Errc::invalid_config, "bank needs classes >= 1 and dim >= 1");
  prototypes_.assign(classes, Vec());
  init_.assign(classes, false);
}

void PrototypeBank::check_label(int label) const {
  if (label < 1 || label > classes())
    fail(Errc::uninitialized_prototype, "label outside 1..K: " + std::to_string(label));
}

bool PrototypeBank::initialized(int label) const {
  check_label(label);
  return init_[label - 1];
}

bool PrototypeBank::all_initialized() const {
  return std::all_of(init_.begin(), init_.end(), [](bool b) { return b; });
}

int PrototypeBank::initialized_count() const {
  return static_cast<int>(std::count(init_.begin(), init_.end(), true));
}

const Vec& PrototypeBank::prototype(int label) const {
  check_label(label);
  if (!init_[label - 1])
    fail(Errc::uninitialized_prototype, "prototype " + std::to_string(label) + " not initialized");
  return prototypes_[label - 1];
}

void PrototypeBank::set_prototype(int label, Vec unit_norm_value) {
  check_label(label);
  if (static_cast<int>(unit_norm_value.size()) != dim_)
    fail(Errc::shape_mismatch, "prototype dimension mismatch");
  if (std::abs(l2_norm(unit_norm_value) - 1.0) > 1e-9)
    fail(Errc::not_normalized, "prototypes must be unit norm");
  prototypes_[label - 1] = std::move(unit_norm_value);
  init_[label - 1] = true;
}

std::vector<double> relevance_weights(const Vec& embedding, const std::vector<int>& labels,
                                      const PrototypeBank& bank) {
  if (labels.empty()) fail(Errc::empty_input, "relevance weights need at least one label");
  Vec scores;
  scores.reserve(labels.size());
  for (int label : labels) scores.push_back(cosine_similarity(embedding, bank.prototype(label)));
  return softmax(scores, 1.0);
}

Vec update_prototype(const Vec& prototype, const Vec& token, double eta, double weight) {
  if (!(eta >= 0.0 && eta <= 1.0)) fail(Errc::invalid_threshold, "momentum eta must be in [0,1]");
  if (prototype.size() != token.size()) fail(Errc::length_mismatch, "prototype/token dims differ");
  Vec blend(prototype.size());
  for (std::size_t i = 0; i < blend.size(); ++i)
    blend[i] = eta * prototype[i] + weight * (1.0 - eta) * token[i];
  return l2_normalize(blend);
}

BankUpdateStats update_bank(PrototypeBank& bank, const std::vector<ClassToken>& tokens,
                            double eta) {
  BankUpdateStats stats;
  for (const ClassToken& token : tokens) {
    if (token.labels.empty()) fail(Errc::empty_input, "class token without labels");
    if (token.labels.size() == 1) {
      const int label = token.labels.front();
      if (!bank.initialized(label)) {
        bank.set_prototype(label, l2_normalize(token.embedding));
        ++stats.initialized;
      } else {
        bank.set_prototype(label, update_prototype(bank.prototype(label), token.embedding, eta, 1.0));
        ++stats.updated;
      }
      continue;
    }
    std::vector<int> live;
    for (int label : token.labels) {
      if (bank.initialized(label))
        live.push_back(label);
      else
        ++stats.skipped;
    }
    if (live.empty()) continue;
    const std::vector<double> weights = relevance_weights(token.embedding, live, bank);
    for (std::size_t i = 0; i < live.size(); ++i) {
      bank.set_prototype(live[i],
                         update_prototype(bank.prototype(live[i]), token.embedding, eta, weights[i]));
      ++stats.updated;
    }
  }
  return stats;
}

Mat similarity_matrix(const PrototypeBank& bank) {
  const int k = bank.classes();
  Mat matrix(k, Vec(k, 0.0));
  for (int i = 1; i <= k; ++i)
    for (int j = i; j <= k; ++j) {
      const double sim = cosine_similarity(bank.prototype(i), bank.prototype(j));
      matrix[i - 1][j - 1] = sim;
      matrix[j - 1][i - 1] = sim;
    }
  return matrix;
}

double max_off_diagonal(const Mat& matrix) {
  double top = -1.0;
  for (std::size_t i = 0; i < matrix.size(); ++i)
    for (std::size_t j = 0; j < matrix.size(); ++j)
      if (i != j) top = std::max(top, matrix[i][j]);
  return top;
}

}  // namespace seco
