#include "seco/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace seco {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::zero_vector: return "ZeroVector";
    case Errc::not_normalized: return "NotNormalized";
    case Errc::empty_input: return "EmptyInput";
    case Errc::non_positive_temperature: return "NonPositiveTemperature";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::invalid_threshold: return "InvalidThreshold";
    case Errc::patch_larger_than_image: return "PatchLargerThanImage";
    case Errc::mask_shape_mismatch: return "MaskShapeMismatch";
    case Errc::uninitialized_prototype: return "UninitializedPrototype";
    case Errc::batch_exceeds_capacity: return "BatchExceedsCapacity";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::no_positives: return "NoPositives";
    case Errc::missing_prototype: return "MissingPrototype";
    case Errc::non_finite_component: return "NonFiniteComponent";
    case Errc::no_true_positives: return "NoTruePositives";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::bad_snapshot: return "BadSnapshot";
  }
  return "UnknownError";
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(Errc::length_mismatch, "dot over unequal lengths");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

Vec l2_normalize(std::span<const double> v) {
  const double norm = l2_norm(v);
  if (norm < kZeroNormEps) fail(Errc::zero_vector, "cannot normalize a (near-)zero vector");
  Vec out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na < kZeroNormEps || nb < kZeroNormEps)
    fail(Errc::zero_vector, "cosine similarity of a (near-)zero vector");
  const double value = dot(a, b) / (na * nb);
  return std::clamp(value, -1.0, 1.0);
}

Vec softmax(std::span<const double> scores, double tau) {
  if (scores.empty()) fail(Errc::empty_input, "softmax of an empty score list");
  if (!(tau > 0.0)) fail(Errc::non_positive_temperature, "softmax temperature must be > 0");
  const double top = *std::max_element(scores.begin(), scores.end());
  Vec out(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp((scores[i] - top) / tau);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void check_finite(std::span<const double> v, const char* what) {
  if (!all_finite(v)) fail(Errc::non_finite_component, what);
}

}  // namespace seco
