#pragma once

#include <span>
#include <vector>

#include "seco/error.hpp"

namespace seco {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // list of rows

inline constexpr double kZeroNormEps = 1e-12;

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// Unit-norm copy of v; direction preserved.
Vec l2_normalize(std::span<const double> v);

/// Cosine of the angle between a and b, clamped to [-1, 1].
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Softmax of scores/tau with max subtraction; entries positive, summing to 1.
Vec softmax(std::span<const double> scores, double tau);

bool all_finite(std::span<const double> v);
void check_finite(std::span<const double> v, const char* what);

}  // namespace seco
