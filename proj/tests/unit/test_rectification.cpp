#include <cmath>

#include "doctest.h"
#include "seco/rectification.hpp"
#include "seco/rng.hpp"
#include "seco/tagging.hpp"

using namespace seco;

namespace {

// Positives at chosen similarity to the unit-x query.
std::vector<Vec> positives_with_sims(std::initializer_list<double> sims) {
  std::vector<Vec> out;
  for (double s : sims) out.push_back(Vec{s, std::sqrt(1.0 - s * s)});
  return out;
}

const Vec kQuery{1.0, 0.0};

}  // namespace

TEST_CASE("mean positive similarity") {
  CHECK(mean_positive_similarity(kQuery, {kQuery}) == doctest::Approx(1.0));
  CHECK(mean_positive_similarity(kQuery, positives_with_sims({0.9, 0.8, 0.1})) ==
        doctest::Approx(0.6));
  CHECK(mean_positive_similarity(kQuery, positives_with_sims({0.0})) == doctest::Approx(0.0));
  try {
    mean_positive_similarity(kQuery, {});
    FAIL("expected NoPositives");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_positives);
  }
}

TEST_CASE("rectify keeps tags with few below-mean pairs") {
  // mean 0.6, one of three strictly below, ratio 1/3 <= 0.5
  CHECK(rectify_tag(kQuery, 4, positives_with_sims({0.9, 0.8, 0.1}), 0.5) == 4);
}

TEST_CASE("rectify flips tags with a skewed similarity profile") {
  // mean 0.3667, two of three strictly below, ratio 2/3 > 0.5
  CHECK(rectify_tag(kQuery, 4, positives_with_sims({0.9, 0.1, 0.1}), 0.5) == kUncertainTag);
}

TEST_CASE("equal similarities are never noisy") {
  CHECK(rectify_tag(kQuery, 2, positives_with_sims({0.4, 0.4, 0.4, 0.4}), 0.1) == 2);
}

TEST_CASE("no positives means no evidence") {
  CHECK(rectify_tag(kQuery, 3, {}, 0.6) == 3);
}

TEST_CASE("rectification output is the input tag or uncertain") {
  Rng rng(101);
  for (int t = 0; t < 200; ++t) {
    const int dim = rng.uniform_int(2, 5);
    Vec q(dim);
    for (double& x : q) x = rng.normal();
    q = l2_normalize(q);
    std::vector<Vec> positives;
    const int count = rng.uniform_int(0, 12);
    for (int i = 0; i < count; ++i) {
      Vec p(dim);
      for (double& x : p) x = rng.normal();
      positives.push_back(l2_normalize(p));
    }
    const int tag = rng.uniform_int(1, 6);
    const int out = rectify_tag(q, tag, positives, rng.uniform(0.1, 0.9));
    CHECK((out == tag || out == kUncertainTag));
  }
}

TEST_CASE("strictly-below counting matches a brute-force replay") {
  Rng rng(102);
  for (int t = 0; t < 200; ++t) {
    Vec q(3);
    for (double& x : q) x = rng.normal();
    q = l2_normalize(q);
    std::vector<Vec> positives;
    const int count = rng.uniform_int(1, 15);
    for (int i = 0; i < count; ++i) {
      Vec p(3);
      for (double& x : p) x = rng.normal();
      positives.push_back(l2_normalize(p));
    }

    double sum = 0.0;
    for (const Vec& p : positives) sum += dot(q, p);
    const double mean = sum / count;
    int below = 0;
    for (const Vec& p : positives)
      if (dot(q, p) < mean) ++below;

    const RectifyStats stats = rectify_stats(q, positives);
    CHECK(stats.mean == mean);
    CHECK(stats.below_mean == below);
    CHECK(stats.positives == count);
  }
}

TEST_CASE("rectification rejects invalid inputs") {
  try {
    rectify_tag(kQuery, 1, {}, 1.0);
    FAIL("expected InvalidThreshold");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_threshold);
  }
  CHECK_THROWS_AS(rectify_tag(kQuery, kBackgroundTag, {}, 0.5), Error);
}
