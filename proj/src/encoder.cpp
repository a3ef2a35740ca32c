#include "seco/encoder.hpp"

#include <cmath>

namespace seco {

// Smoothing floor for the per-cell normalization.
static constexpr double kCellNormEps = 1e-6;

namespace {

void append(std::vector<double>& flat, const Mat& m) {
  for (const Vec& row : m) flat.insert(flat.end(), row.begin(), row.end());
}

void append(std::vector<double>& flat, const Vec& v) {
  flat.insert(flat.end(), v.begin(), v.end());
}

std::size_t take(std::span<const double> flat, std::size_t pos, Mat& m, int rows, int cols) {
  m.assign(rows, Vec(cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m[r][c] = flat[pos++];
  return pos;
}

std::size_t take(std::span<const double> flat, std::size_t pos, Vec& v, int count) {
  v.assign(flat.begin() + pos, flat.begin() + pos + count);
  return pos + count;
}

Mat random_matrix(int rows, int cols, double scale, Rng& rng) {
  Mat m(rows, Vec(cols));
  for (Vec& row : m)
    for (double& x : row) x = scale * rng.normal();
  return m;
}

}  // namespace

std::size_t EncoderParams::parameter_count() const {
  const std::size_t h = hidden_dim(), d = input_dim(), c = embed_dim();
  return h * d + h + c * h + c * c;
}

std::vector<double> EncoderParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  append(flat, w1);
  append(flat, b1);
  append(flat, w2);
  append(flat, wp);
  return flat;
}

EncoderParams EncoderParams::from_flat(std::span<const double> flat, int input, int hidden,
                                       int embed) {
  EncoderParams params;
  std::size_t pos = 0;
  pos = take(flat, pos, params.w1, hidden, input);
  pos = take(flat, pos, params.b1, hidden);
  pos = take(flat, pos, params.w2, embed, hidden);
  pos = take(flat, pos, params.wp, embed, embed);
  if (pos != flat.size()) fail(Errc::length_mismatch, "flat parameter vector has wrong length");
  params.center.assign(embed, 0.0);
  return params;
}

EncoderParams EncoderParams::init(int input, int hidden, int embed, Rng& rng) {
  EncoderParams params;
  params.w1 = random_matrix(hidden, input, 1.0 / std::sqrt(input), rng);
  params.b1.assign(hidden, 0.0);
  params.w2 = random_matrix(embed, hidden, 1.0 / std::sqrt(hidden), rng);
  params.wp = random_matrix(embed, embed, 1.0 / std::sqrt(embed), rng);
  params.center.assign(embed, 0.0);
  return params;
}

EncoderGrads EncoderGrads::zeros_like(const EncoderParams& params) {
  EncoderGrads grads;
  grads.w1.assign(params.hidden_dim(), Vec(params.input_dim(), 0.0));
  grads.b1.assign(params.hidden_dim(), 0.0);
  grads.w2.assign(params.embed_dim(), Vec(params.hidden_dim(), 0.0));
  grads.wp.assign(params.embed_dim(), Vec(params.embed_dim(), 0.0));
  return grads;
}

void EncoderGrads::add_scaled(const EncoderGrads& other, double scale) {
  auto add_mat = [scale](Mat& into, const Mat& from) {
    for (std::size_t r = 0; r < into.size(); ++r)
      for (std::size_t c = 0; c < into[r].size(); ++c) into[r][c] += scale * from[r][c];
  };
  auto add_vec = [scale](Vec& into, const Vec& from) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += scale * from[i];
  };
  add_mat(w1, other.w1);
  add_vec(b1, other.b1);
  add_mat(w2, other.w2);
  add_mat(wp, other.wp);
}

std::vector<double> EncoderGrads::flatten() const {
  std::vector<double> flat;
  append(flat, w1);
  append(flat, b1);
  append(flat, w2);
  append(flat, wp);
  return flat;
}

Vec embed(const EncoderParams& params, const FeatureGrid& cells, EmbedCache* cache) {
  if (cells.channels != params.input_dim())
    fail(Errc::shape_mismatch, "cell feature dimension does not match the encoder");
  const int hidden = params.hidden_dim();
  const int embed_d = params.embed_dim();
  const int count = cells.cells();
  if (count == 0) fail(Errc::empty_input, "cannot embed an empty grid");

  // Cell codes are centered by a running mean, then smoothly normalized
  // before pooling: the token mixes cell directions by area, no region can
  // dominate by magnitude, and the shared component of the code
  // distribution is bled off where the aggregation happens.
  const bool centered = !params.center.empty();
  Mat hidden_acts(count, Vec(hidden));
  Mat cell_codes(count, Vec(embed_d));
  Vec cell_scales(count);
  Vec raw_mean(embed_d, 0.0);
  Vec token(embed_d, 0.0);
  for (int i = 0; i < count; ++i) {
    auto cell = cells.cell(i / cells.width, i % cells.width);
    Vec& act = hidden_acts[i];
    for (int h = 0; h < hidden; ++h)
      act[h] = std::tanh(dot(params.w1[h], cell) + params.b1[h]);
    Vec& code = cell_codes[i];
    double sq = kCellNormEps * kCellNormEps;
    for (int e = 0; e < embed_d; ++e) {
      code[e] = dot(params.w2[e], act);
      raw_mean[e] += code[e];
      if (centered) code[e] -= params.center[e];
      sq += code[e] * code[e];
    }
    cell_scales[i] = std::sqrt(sq);
    for (int e = 0; e < embed_d; ++e) {
      code[e] /= cell_scales[i];
      token[e] += code[e];
    }
  }
  for (double& x : token) x /= count;
  for (double& x : raw_mean) x /= count;

  // Token direction, not magnitude: a mixed grid has partial cancellation in
  // the pooled vector, and the projection should see comparable scales for
  // small patches and full images.
  double token_sq = kCellNormEps * kCellNormEps;
  for (double x : token) token_sq += x * x;
  const double token_scale = std::sqrt(token_sq);
  for (double& x : token) x /= token_scale;

  Vec projected(embed_d);
  for (int e = 0; e < embed_d; ++e) projected[e] = dot(params.wp[e], token);
  const double norm = l2_norm(projected);
  Vec embedding = l2_normalize(projected);

  if (cache) {
    cache->input = cells;
    cache->hidden = std::move(hidden_acts);
    cache->cell_dirs = std::move(cell_codes);
    cache->cell_scales = std::move(cell_scales);
    cache->token_scale = token_scale;
    cache->token = std::move(token);
    cache->raw_cell_mean = std::move(raw_mean);
    cache->projected = std::move(projected);
    cache->projected_norm = norm;
    cache->embedding = embedding;
  }
  return embedding;
}

void embed_backward(const EncoderParams& params, const EmbedCache& cache,
                    std::span<const double> embedding_grad, EncoderGrads& grads) {
  const int hidden = params.hidden_dim();
  const int embed_d = params.embed_dim();
  const int count = cache.input.cells();

  // Through q = p / ||p||: dp = (g - (g . q) q) / ||p||
  const double along = dot(embedding_grad, cache.embedding);
  Vec d_projected(embed_d);
  for (int e = 0; e < embed_d; ++e)
    d_projected[e] = (embedding_grad[e] - along * cache.embedding[e]) / cache.projected_norm;

  Vec d_token(embed_d, 0.0);
  for (int e = 0; e < embed_d; ++e) {
    for (int j = 0; j < embed_d; ++j) {
      grads.wp[e][j] += d_projected[e] * cache.token[j];
      d_token[j] += params.wp[e][j] * d_projected[e];
    }
  }

  // Through the token normalization (cache.token is already normalized).
  const double along_token = dot(d_token, cache.token);
  const double inv = 1.0 / (count * cache.token_scale);
  Vec d_dir(embed_d);
  for (int e = 0; e < embed_d; ++e)
    d_dir[e] = (d_token[e] - along_token * cache.token[e]) * inv;

  Vec d_code(embed_d);
  Vec d_hidden(hidden);
  for (int i = 0; i < count; ++i) {
    const Vec& act = cache.hidden[i];
    const Vec& dir = cache.cell_dirs[i];
    auto cell = cache.input.cell(i / cache.input.width, i % cache.input.width);

    // Through the smooth cell normalization: dc = (g - (g . dir) dir) / scale.
    const double along_dir = dot(d_dir, dir);
    for (int e = 0; e < embed_d; ++e)
      d_code[e] = (d_dir[e] - along_dir * dir[e]) / cache.cell_scales[i];

    std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
    for (int e = 0; e < embed_d; ++e) {
      for (int h = 0; h < hidden; ++h) {
        grads.w2[e][h] += d_code[e] * act[h];
        d_hidden[h] += params.w2[e][h] * d_code[e];
      }
    }
    for (int h = 0; h < hidden; ++h) {
      const double d_pre = d_hidden[h] * (1.0 - act[h] * act[h]);
      grads.b1[h] += d_pre;
      for (int d = 0; d < cache.input.channels; ++d) grads.w1[h][d] += d_pre * cell[d];
    }
  }
}

}  // namespace seco
