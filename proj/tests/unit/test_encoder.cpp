#include <cmath>

#include "doctest.h"
#include "seco/encoder.hpp"
#include "seco/rng.hpp"
#include "seco/trainer.hpp"

using namespace seco;

namespace {

FeatureGrid random_grid(int h, int w, int d, Rng& rng) {
  FeatureGrid g(h, w, d);
  for (double& x : g.data) x = rng.uniform(-1.0, 1.0);
  return g;
}

}  // namespace

TEST_CASE("embeddings are unit norm and deterministic") {
  Rng rng(211);
  const EncoderParams params = EncoderParams::init(5, 6, 4, rng);
  for (int t = 0; t < 10; ++t) {
    const FeatureGrid g = random_grid(3, 3, 5, rng);
    const Vec q = embed(params, g);
    CHECK(std::abs(l2_norm(q) - 1.0) < 1e-12);
    CHECK(embed(params, g) == q);
  }
}

TEST_CASE("flatten and from_flat round trip") {
  Rng rng(212);
  const EncoderParams params = EncoderParams::init(4, 5, 3, rng);
  const auto flat = params.flatten();
  CHECK(flat.size() == params.parameter_count());
  const EncoderParams back = EncoderParams::from_flat(flat, 4, 5, 3);
  CHECK(back.flatten() == flat);

  CHECK_THROWS_AS(EncoderParams::from_flat(std::vector<double>(3, 0.0), 4, 5, 3), Error);
}

TEST_CASE("identical augmentations and shared weights give q == k") {
  Rng rng(213);
  const int d = 4;
  Config cfg;
  cfg.scenario.feature_dim = d;
  cfg.scenario.embed_dim = 3;
  cfg.hyper.hidden_dim = 5;
  const EncoderParams enc = EncoderParams::init(d, 5, 3, rng);

  PatchSet patches;
  patches.patch_height = 2;
  patches.patch_width = 2;
  for (int i = 0; i < 3; ++i) {
    Patch p;
    p.features = random_grid(2, 2, d, rng);
    p.mask = PseudoMask(2, 2, 0);
    patches.patches.push_back(std::move(p));
  }

  Rng aug_rng(214);
  const EncodedViews views = encode_views(patches, enc, enc, 0.0, 0.0, 0.0, 0.0, aug_rng);
  REQUIRE(views.queries.size() == 3);
  for (std::size_t i = 0; i < views.queries.size(); ++i) {
    CHECK(views.queries[i] == views.keys[i]);
    CHECK(std::abs(l2_norm(views.queries[i]) - 1.0) < 1e-12);
  }

  // Same seed, same outputs.
  Rng again(214);
  const EncodedViews repeat = encode_views(patches, enc, enc, 0.0, 0.0, 0.0, 0.0, again);
  CHECK(repeat.queries == views.queries);
}

TEST_CASE("noisy views differ between student and teacher paths") {
  Rng rng(215);
  const EncoderParams enc = EncoderParams::init(4, 5, 3, rng);
  PatchSet patches;
  patches.patch_height = 2;
  patches.patch_width = 2;
  Patch p;
  p.features = random_grid(2, 2, 4, rng);
  p.mask = PseudoMask(2, 2, 0);
  patches.patches.push_back(std::move(p));

  Rng aug_rng(216);
  const EncodedViews views = encode_views(patches, enc, enc, 0.05, 0.3, 0.5, 0.4, aug_rng);
  CHECK(views.queries[0] != views.keys[0]);
}

TEST_CASE("embed backward matches finite differences") {
  Rng rng(217);
  const int d = 3, hidden = 4, embed_d = 3;
  EncoderParams params = EncoderParams::init(d, hidden, embed_d, rng);
  const FeatureGrid g = random_grid(2, 2, d, rng);
  const Vec direction = l2_normalize(Vec{0.3, -1.0, 0.7});

  // Scalar probe: direction . embedding.
  EmbedCache cache;
  embed(params, g, &cache);
  EncoderGrads grads = EncoderGrads::zeros_like(params);
  embed_backward(params, cache, direction, grads);

  const auto flat = params.flatten();
  const auto analytic = grads.flatten();
  std::vector<double> numeric(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    auto probe = flat;
    probe[i] = flat[i] + 1e-6;
    const double up =
        dot(direction, embed(EncoderParams::from_flat(probe, d, hidden, embed_d), g));
    probe[i] = flat[i] - 1e-6;
    const double down =
        dot(direction, embed(EncoderParams::from_flat(probe, d, hidden, embed_d), g));
    numeric[i] = (up - down) / 2e-6;
  }
  for (std::size_t i = 0; i < flat.size(); ++i)
    CHECK(std::abs(analytic[i] - numeric[i]) < 1e-5);
}
