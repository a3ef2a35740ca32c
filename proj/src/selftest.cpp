#include "seco/selftest.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "seco/losses.hpp"
#include "seco/prototypes.hpp"
#include "seco/rectification.hpp"
#include "seco/reservoir.hpp"
#include "seco/rng.hpp"
#include "seco/tagging.hpp"
#include "seco/trainer.hpp"

namespace seco {

std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double step) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = f(x);
    x[i] = saved - step;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size())
    fail(Errc::length_mismatch, "gradient lengths differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max(1.0, std::abs(numeric[i]));
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

namespace {

Vec random_unit(int dim, Rng& rng) {
  Vec v(dim);
  for (double& x : v) x = rng.normal();
  return l2_normalize(v);
}

std::vector<double> flatten_queries(const std::vector<Vec>& queries) {
  std::vector<double> flat;
  for (const Vec& q : queries) flat.insert(flat.end(), q.begin(), q.end());
  return flat;
}

std::vector<Vec> unflatten_queries(const std::vector<double>& flat, std::size_t count, int dim) {
  std::vector<Vec> queries(count);
  for (std::size_t i = 0; i < count; ++i)
    queries[i].assign(flat.begin() + i * dim, flat.begin() + (i + 1) * dim);
  return queries;
}

double check_lig(int trials, bool inject, Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int dim = rng.uniform_int(3, 8);
    const int candidates = rng.uniform_int(2, 4);
    const int count = rng.uniform_int(1, 6);
    const double tau = rng.uniform(0.2, 1.0);

    std::vector<int> labels;
    Mat protos;
    for (int l = 0; l < candidates; ++l) {
      labels.push_back(l + 1);
      protos.push_back(random_unit(dim, rng));
    }
    std::vector<Vec> queries;
    std::vector<int> tags;
    for (int i = 0; i < count; ++i) {
      queries.push_back(random_unit(dim, rng));
      tags.push_back(rng.uniform_int(1, candidates));
    }

    const LossBundle bundle = lig_loss(queries, tags, labels, protos, tau);
    std::vector<double> analytic = flatten_queries(bundle.query_grads);
    if (inject && t == 0) analytic[0] += 1e-3;

    auto f = [&](const std::vector<double>& flat) {
      return lig_loss(unflatten_queries(flat, queries.size(), dim), tags, labels, protos, tau)
          .value;
    };
    const auto numeric = central_differences(f, flatten_queries(queries));
    worst = std::max(worst, max_relative_error(analytic, numeric));
  }
  return worst;
}

double check_lil(int trials, bool inject, Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int dim = rng.uniform_int(3, 6);
    const double tau = rng.uniform(0.2, 1.0);

    TagReservoir reservoir(64);
    std::vector<TaggedEmbedding> qs, ks;
    const int entries = rng.uniform_int(4, 12);
    for (int i = 0; i < entries; ++i) {
      const int tag = rng.uniform_int(-1, 3);  // includes uncertain and background
      qs.push_back({random_unit(dim, rng), tag});
      ks.push_back({random_unit(dim, rng), tag});
    }
    reservoir.push_batch(qs, ks);

    const int count = rng.uniform_int(1, 6);
    std::vector<Vec> queries;
    std::vector<int> tags;
    for (int i = 0; i < count; ++i) {
      queries.push_back(random_unit(dim, rng));
      tags.push_back(rng.uniform_int(-1, 3));
    }

    const LossBundle bundle = lil_loss(queries, tags, reservoir, tau);
    std::vector<double> analytic = flatten_queries(bundle.query_grads);
    if (inject && t == 0) analytic[0] += 1e-3;

    auto f = [&](const std::vector<double>& flat) {
      return lil_loss(unflatten_queries(flat, queries.size(), dim), tags, reservoir, tau).value;
    };
    const auto numeric = central_differences(f, flatten_queries(queries));
    worst = std::max(worst, max_relative_error(analytic, numeric));
  }
  return worst;
}

double check_soft_margin(int trials, bool inject, Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int classes = rng.uniform_int(1, 8);
    Vec logits(classes);
    std::vector<int> targets(classes);
    for (int l = 0; l < classes; ++l) {
      logits[l] = rng.uniform(-4.0, 4.0);
      targets[l] = rng.uniform01() < 0.5 ? 1 : 0;
    }
    ScalarLoss loss = multilabel_soft_margin(logits, targets);
    if (inject && t == 0) loss.grad[0] += 1e-3;
    auto f = [&](const std::vector<double>& x) {
      return multilabel_soft_margin(x, targets).value;
    };
    const auto numeric = central_differences(f, logits);
    worst = std::max(worst, max_relative_error(loss.grad, numeric));
  }
  return worst;
}

double check_seg(int trials, bool inject, Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int height = rng.uniform_int(2, 3);
    const int width = rng.uniform_int(2, 3);
    const int classes = rng.uniform_int(1, 3);  // labels 0..classes
    PseudoMask mask(height, width);
    for (int& label : mask.labels)
      label = rng.uniform01() < 0.2 ? kIgnoreLabel : rng.uniform_int(0, classes);

    const int cells = height * width;
    Mat scores(cells, Vec(classes + 1));
    for (Vec& row : scores)
      for (double& x : row) x = rng.uniform(-2.0, 2.0);

    CellLoss loss = seg_cross_entropy(scores, mask);
    std::vector<double> analytic = flatten_queries(loss.cell_grads);
    if (inject && t == 0) analytic[0] += 1e-3;

    auto f = [&](const std::vector<double>& flat) {
      return seg_cross_entropy(unflatten_queries(flat, cells, classes + 1), mask).value;
    };
    const auto numeric = central_differences(f, flatten_queries(scores));

    // An all-ignored mask has no gradient to compare.
    bool any_valid = false;
    for (int label : mask.labels) any_valid |= (label != kIgnoreLabel);
    if (!any_valid) continue;
    worst = std::max(worst, max_relative_error(analytic, numeric));
  }
  return worst;
}

struct ChainFixture {
  Config cfg;
  std::vector<LabeledImage> images;
  std::vector<const LabeledImage*> batch;
  std::vector<PseudoMask> masks;
  std::vector<ContrastView> views;
  PrototypeBank bank{2, 3};
  TagReservoir reservoir{32};
  StudentState student;
};

ChainFixture make_chain_fixture(Rng& rng) {
  ChainFixture fx;
  fx.cfg.scenario.classes = 2;
  fx.cfg.scenario.feature_dim = 4;
  fx.cfg.scenario.embed_dim = 3;
  fx.cfg.scenario.grid_height = 4;
  fx.cfg.scenario.grid_width = 4;
  fx.cfg.scenario.patch_height = 2;
  fx.cfg.scenario.patch_width = 2;
  fx.cfg.hyper.hidden_dim = 4;
  fx.cfg.hyper.tau_g = 0.5;
  fx.cfg.hyper.tau_l = 0.3;

  fx.student = StudentState::init(fx.cfg, rng);

  for (int i = 0; i < 2; ++i) {
    LabeledImage image;
    image.features = FeatureGrid(4, 4, 4);
    for (double& x : image.features.data) x = rng.uniform(-1.0, 1.0);
    image.ground_truth = PseudoMask(4, 4, 0);
    image.labels = i == 0 ? std::vector<int>{1, 2} : std::vector<int>{2};
    fx.images.push_back(std::move(image));

    PseudoMask mask(4, 4);
    for (int& label : mask.labels) {
      const double u = rng.uniform01();
      label = u < 0.15 ? kIgnoreLabel : rng.uniform_int(0, 2);
    }
    fx.masks.push_back(std::move(mask));
  }
  for (const LabeledImage& image : fx.images) fx.batch.push_back(&image);

  fx.bank.set_prototype(1, random_unit(3, rng));
  fx.bank.set_prototype(2, random_unit(3, rng));

  std::vector<TaggedEmbedding> qs, ks;
  for (int i = 0; i < 6; ++i) {
    const int tag = rng.uniform_int(-1, 2);
    qs.push_back({random_unit(3, rng), tag});
    ks.push_back({random_unit(3, rng), tag});
  }
  fx.reservoir.push_batch(qs, ks);

  const int tags[] = {1, 2, 0, -1, 1, 2};
  for (int v = 0; v < 6; ++v) {
    ContrastView view;
    view.weak = FeatureGrid(2, 2, 4);
    for (double& x : view.weak.data) x = rng.uniform(-1.0, 1.0);
    view.tag = tags[v];
    view.image_index = v % 2;
    fx.views.push_back(std::move(view));
  }
  return fx;
}

std::vector<double> flatten_student(const StudentState& student) {
  std::vector<double> flat = student.encoder.flatten();
  for (const Mat* head : {&student.aux_head, &student.cls_head, &student.seg_head})
    for (const Vec& row : *head) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

StudentState student_from_flat(const StudentState& like, const std::vector<double>& flat) {
  StudentState out = like;
  const std::size_t enc = like.encoder.parameter_count();
  out.encoder = EncoderParams::from_flat({flat.data(), enc}, like.encoder.input_dim(),
                                         like.encoder.hidden_dim(), like.encoder.embed_dim());
  std::size_t pos = enc;
  for (Mat* head : {&out.aux_head, &out.cls_head, &out.seg_head})
    for (Vec& row : *head)
      for (double& x : row) x = flat[pos++];
  return out;
}

std::vector<double> flatten_grads(const StudentState& like, const ParamGrads& grads) {
  std::vector<double> flat = grads.encoder.flatten();
  (void)like;
  for (const Mat* head : {&grads.aux_head, &grads.cls_head, &grads.seg_head})
    for (const Vec& row : *head) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

double check_chain(int trials, bool inject, Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    ChainFixture fx = make_chain_fixture(rng);

    ParamGrads grads = ParamGrads::zeros_like(fx.student);
    compute_losses(fx.student, fx.batch, fx.masks, fx.views, fx.bank, fx.reservoir, fx.cfg.hyper,
                   TrainFlags{}, &grads);
    std::vector<double> analytic = flatten_grads(fx.student, grads);
    if (inject && t == 0) analytic[0] += 1e-3;

    auto f = [&](const std::vector<double>& flat) {
      const StudentState probe = student_from_flat(fx.student, flat);
      return compute_losses(probe, fx.batch, fx.masks, fx.views, fx.bank, fx.reservoir,
                            fx.cfg.hyper, TrainFlags{})
          .total;
    };
    const auto numeric = central_differences(f, flatten_student(fx.student));
    worst = std::max(worst, max_relative_error(analytic, numeric));
  }
  return worst;
}

// Replays the reservoir against a plain list model; returns mismatch count.
int reservoir_oracle(int operations, Rng& rng) {
  int mismatches = 0;
  int done = 0;
  while (done < operations) {
    const std::size_t capacity = static_cast<std::size_t>(rng.uniform_int(4, 64));
    TagReservoir reservoir(capacity);
    std::vector<std::pair<Vec, int>> model;

    const int burst = std::min(operations - done, rng.uniform_int(20, 60));
    for (int op = 0; op < burst; ++op, ++done) {
      if (rng.uniform01() < 0.7) {
        const int pairs = rng.uniform_int(1, static_cast<int>(capacity / 2));
        std::vector<TaggedEmbedding> qs, ks;
        for (int i = 0; i < pairs; ++i) {
          const int tag = rng.uniform_int(-1, 4);
          qs.push_back({random_unit(3, rng), tag});
          ks.push_back({random_unit(3, rng), tag});
        }
        reservoir.push_batch(qs, ks);
        for (const auto& q : qs) model.emplace_back(q.embedding, q.tag);
        for (const auto& k : ks) model.emplace_back(k.embedding, k.tag);
        while (model.size() > capacity) model.erase(model.begin());

        if (reservoir.size() != model.size()) {
          ++mismatches;
          continue;
        }
        std::size_t i = 0;
        std::uint64_t last_index = 0;
        for (const ReservoirEntry& entry : reservoir.entries()) {
          if (entry.embedding != model[i].first || entry.tag != model[i].second) ++mismatches;
          if (i > 0 && entry.insert_index <= last_index) ++mismatches;
          last_index = entry.insert_index;
          ++i;
        }
      } else {
        const int tag = rng.uniform_int(-1, 4);
        std::vector<Vec> expected;
        for (const auto& [embedding, entry_tag] : model)
          if (entry_tag == tag) expected.push_back(embedding);
        if (reservoir.positives(tag) != expected) ++mismatches;
      }
    }
  }
  return mismatches;
}

// Brute-force recomputation of the rectification statistic.
int rectification_oracle(int cases, Rng& rng) {
  int mismatches = 0;
  for (int t = 0; t < cases; ++t) {
    const int dim = rng.uniform_int(2, 8);
    const Vec query = random_unit(dim, rng);
    std::vector<Vec> positives;
    const int count = rng.uniform_int(0, 20);
    for (int i = 0; i < count; ++i) positives.push_back(random_unit(dim, rng));
    const double sigma = rng.uniform(0.05, 0.95);
    const int tag = rng.uniform_int(1, 5);

    if (positives.empty()) {
      if (rectify_tag(query, tag, positives, sigma) != tag) ++mismatches;
      continue;
    }

    double sum = 0.0;
    for (const Vec& positive : positives) sum += dot(query, positive);
    const double mean = sum / static_cast<double>(positives.size());
    int below = 0;
    for (const Vec& positive : positives)
      if (dot(query, positive) < mean) ++below;

    const RectifyStats stats = rectify_stats(query, positives);
    if (stats.mean != mean || stats.below_mean != below ||
        stats.positives != static_cast<int>(positives.size()))
      ++mismatches;
    if (mean_positive_similarity(query, positives) != mean) ++mismatches;

    const int expected =
        (static_cast<double>(below) / positives.size() > sigma) ? kUncertainTag : tag;
    if (rectify_tag(query, tag, positives, sigma) != expected) ++mismatches;
  }
  return mismatches;
}

double prototype_norm_sweep(int rounds, Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < rounds; ++t) {
    const int classes = rng.uniform_int(2, 6);
    const int dim = rng.uniform_int(3, 8);
    PrototypeBank bank(classes, dim);
    const double eta = rng.uniform(0.0, 1.0);

    for (int step = 0; step < 50; ++step) {
      ClassToken token;
      token.embedding = Vec(dim);
      for (double& x : token.embedding) x = rng.uniform(-2.0, 2.0);
      if (l2_norm(token.embedding) < 1e-6) continue;
      const int count = rng.uniform_int(1, std::min(3, classes));
      while (static_cast<int>(token.labels.size()) < count) {
        const int label = rng.uniform_int(1, classes);
        bool seen = false;
        for (int existing : token.labels) seen |= (existing == label);
        if (!seen) token.labels.push_back(label);
      }
      update_bank(bank, {token}, eta);
      for (int l = 1; l <= classes; ++l)
        if (bank.initialized(l))
          worst = std::max(worst, std::abs(l2_norm(bank.prototype(l)) - 1.0));
    }
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> run_selftest(std::ostream& out, int trials,
                                      const std::string& inject_fault) {
  Rng rng(20240811);
  std::vector<CheckResult> results;

  auto record = [&](const std::string& name, double error, double threshold) {
    CheckResult result{name, error, threshold, error <= threshold};
    out << "check " << name << ": max_error=" << std::scientific << std::setprecision(3)
        << result.max_error << " threshold=" << result.threshold
        << (result.passed ? " -> PASS" : " -> FAIL") << "\n";
    results.push_back(result);
  };

  record("lig_loss", check_lig(trials, inject_fault == "lig_loss", rng), 1e-4);
  record("lil_loss", check_lil(trials, inject_fault == "lil_loss", rng), 1e-4);
  record("multilabel_soft_margin",
         check_soft_margin(trials, inject_fault == "multilabel_soft_margin", rng), 1e-4);
  record("seg_cross_entropy", check_seg(trials, inject_fault == "seg_cross_entropy", rng), 1e-4);
  record("encoder_chain", check_chain(std::max(1, trials / 4),
                                      inject_fault == "encoder_chain", rng), 1e-4);
  record("reservoir_fifo", reservoir_oracle(10000, rng), 0.0);
  record("rectification", rectification_oracle(1000, rng), 0.0);
  record("prototype_norms", prototype_norm_sweep(20, rng), 1e-9);
  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& result : results)
    if (!result.passed) return false;
  return true;
}

}  // namespace seco
