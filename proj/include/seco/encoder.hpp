#pragma once

#include <span>
#include <vector>

#include "seco/grid.hpp"
#include "seco/numerics.hpp"
#include "seco/rng.hpp"

namespace seco {

/// Two-layer tanh map from feature space to embedding space, applied per
/// cell; cell codes are smoothly unit-normalized, mean-pooled, and passed
/// through a linear projection head. Embeddings are the unit-normalized
/// projection output. The upper layers carry no bias terms: a bias is a
/// shared offset on every embedding, and under normalization it offers a
/// degenerate shortcut that draws all embeddings into one cone.
struct EncoderParams {
  Mat w1;  // hidden x input
  Vec b1;
  Mat w2;  // embed x hidden
  Mat wp;  // embed x embed projection

  /// Running mean of raw cell codes, subtracted before the per-cell
  /// normalization. A buffer, not a parameter: it carries no gradient and is
  /// updated by the trainer between steps. Centering keeps the code
  /// distribution spread around the sphere instead of drifting into a common
  /// cone.
  Vec center;

  int input_dim() const { return w1.empty() ? 0 : static_cast<int>(w1.front().size()); }
  int hidden_dim() const { return static_cast<int>(w1.size()); }
  int embed_dim() const { return static_cast<int>(w2.size()); }

  std::size_t parameter_count() const;  // excludes the center buffer
  std::vector<double> flatten() const;
  static EncoderParams from_flat(std::span<const double> flat, int input, int hidden, int embed);
  static EncoderParams init(int input, int hidden, int embed, Rng& rng);
};

/// Parameter-shaped gradient accumulator.
struct EncoderGrads {
  Mat w1;
  Vec b1;
  Mat w2;
  Mat wp;

  static EncoderGrads zeros_like(const EncoderParams& params);
  void add_scaled(const EncoderGrads& other, double scale);
  std::vector<double> flatten() const;
};

/// Intermediate activations kept for the backward pass.
struct EmbedCache {
  FeatureGrid input;
  Mat hidden;          // per cell, tanh activations
  Mat cell_dirs;       // per cell, smoothly normalized second-layer codes
  Vec cell_scales;     // per cell, sqrt(||code||^2 + eps^2)
  Vec token;           // mean of the normalized cell codes, unit-normalized
  double token_scale = 0.0;
  Vec raw_cell_mean;   // mean raw cell code, feeds the center statistic
  Vec projected;       // wp * token
  double projected_norm = 0.0;
  Vec embedding;  // unit norm
};

/// Embed a grid of cells into a unit-norm vector.
Vec embed(const EncoderParams& params, const FeatureGrid& cells, EmbedCache* cache = nullptr);

/// Accumulate d(loss)/d(params) given d(loss)/d(embedding).
void embed_backward(const EncoderParams& params, const EmbedCache& cache,
                    std::span<const double> embedding_grad, EncoderGrads& grads);

}  // namespace seco
