#pragma once

#include <vector>

#include "seco/numerics.hpp"

namespace seco {

/// Image-level embedding together with the image's label set (1..K).
struct ClassToken {
  Vec embedding;
  std::vector<int> labels;
};

struct BankUpdateStats {
  int initialized = 0;
  int updated = 0;
  int skipped = 0;  // labels dropped because their prototype did not exist yet
};

/// K unit-norm prototypes, one per foreground class, lazily initialized by the
/// first single-label token seen for the class.
class PrototypeBank {
 public:
  PrototypeBank(int classes, int dim);

  int classes() const { return static_cast<int>(prototypes_.size()); }
  int dim() const { return dim_; }
  bool initialized(int label) const;
  bool all_initialized() const;
  int initialized_count() const;

  const Vec& prototype(int label) const;
  void set_prototype(int label, Vec unit_norm_value);

 private:
  void check_label(int label) const;

  int dim_;
  std::vector<Vec> prototypes_;
  std::vector<bool> init_;
};

/// Softmax (temperature 1) over the token's cosine similarity to each listed
/// prototype. All listed labels must be initialized.
std::vector<double> relevance_weights(const Vec& embedding, const std::vector<int>& labels,
                                      const PrototypeBank& bank);

/// Momentum blend normalize(eta * prototype + weight * (1 - eta) * token).
Vec update_prototype(const Vec& prototype, const Vec& token, double eta, double weight);

/// Feed a stream of class tokens through the bank, in order. Single-label
/// tokens initialize missing prototypes (normalized copy) or update with
/// weight 1; multi-label tokens update every initialized label under
/// relevance weights and skip the rest.
BankUpdateStats update_bank(PrototypeBank& bank, const std::vector<ClassToken>& tokens,
                            double eta);

/// K x K cosine similarities; requires a fully initialized bank.
Mat similarity_matrix(const PrototypeBank& bank);

double max_off_diagonal(const Mat& matrix);

}  // namespace seco
