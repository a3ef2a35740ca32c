#include "seco/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace seco {
namespace {

constexpr std::uint64_t kInitStream = 0x5ec0c321;
constexpr std::uint64_t kLoopStream = 0x5ec0c322;

Mat random_head(int rows, int cols, Rng& rng) {
  Mat head(rows, Vec(cols));
  const double scale = 1.0 / std::sqrt(cols);
  for (Vec& row : head)
    for (double& x : row) x = scale * rng.normal();
  return head;
}

Mat zero_like(const Mat& m) {
  Mat out(m.size());
  for (std::size_t r = 0; r < m.size(); ++r) out[r].assign(m[r].size(), 0.0);
  return out;
}

void axpy_mat(Mat& into, const Mat& from, double scale) {
  for (std::size_t r = 0; r < into.size(); ++r)
    for (std::size_t c = 0; c < into[r].size(); ++c) into[r][c] += scale * from[r][c];
}

FeatureGrid add_noise(const FeatureGrid& grid, double scale, Rng& rng) {
  FeatureGrid out = grid;
  for (double& x : out.data) x += scale * rng.normal();
  return out;
}

void drop_channels(FeatureGrid& grid, double rate, Rng& rng) {
  for (int d = 0; d < grid.channels; ++d) {
    const bool drop = rng.uniform01() < rate;
    if (!drop) continue;
    for (int cell = 0; cell < grid.cells(); ++cell)
      grid.data[static_cast<std::size_t>(cell) * grid.channels + d] = 0.0;
  }
}

std::vector<int> binary_targets(const std::vector<int>& labels, int classes) {
  std::vector<int> targets(classes, 0);
  for (int label : labels) targets[label - 1] = 1;
  return targets;
}

RouteEval route_eval(const std::vector<PseudoMask>& pred, const std::vector<PseudoMask>& gt,
                     int classes) {
  const auto counts = accumulate_confusion(pred, gt, classes);
  const IouResult iou = miou(pred, gt, classes);
  RouteEval route;
  route.miou = iou.mean;
  for (int label = 0; label <= classes; ++label) {
    EvalClassRow row;
    row.label = label;
    row.iou = iou.per_class[label];
    const auto& c = counts[label];
    if (c.tp + c.fp > 0) row.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
    if (c.tp + c.fn > 0) row.recall = static_cast<double>(c.tp) / (c.tp + c.fn);
    if (c.tp > 0) row.confusion = static_cast<double>(c.fp) / c.tp;
    route.per_class.push_back(row);
  }
  return route;
}

}  // namespace

StudentState StudentState::init(const Config& cfg, Rng& rng) {
  StudentState student;
  student.encoder = EncoderParams::init(cfg.scenario.feature_dim, cfg.hyper.hidden_dim,
                                        cfg.scenario.embed_dim, rng);
  student.aux_head = random_head(cfg.scenario.classes, cfg.scenario.feature_dim, rng);
  student.cls_head = random_head(cfg.scenario.classes, cfg.scenario.feature_dim, rng);
  student.seg_head = random_head(cfg.scenario.classes + 1, cfg.scenario.feature_dim, rng);
  return student;
}

ParamGrads ParamGrads::zeros_like(const StudentState& student) {
  ParamGrads grads;
  grads.encoder = EncoderGrads::zeros_like(student.encoder);
  grads.aux_head = zero_like(student.aux_head);
  grads.cls_head = zero_like(student.cls_head);
  grads.seg_head = zero_like(student.seg_head);
  return grads;
}

StepLosses compute_losses(const StudentState& student,
                          const std::vector<const LabeledImage*>& batch,
                          const std::vector<PseudoMask>& pseudo_masks,
                          const std::vector<ContrastView>& views, const PrototypeBank& bank,
                          const TagReservoir& reservoir, const Hyperparams& hp,
                          const TrainFlags& flags, ParamGrads* grads,
                          std::vector<Vec>* queries_out) {
  if (batch.size() != pseudo_masks.size())
    fail(Errc::shape_mismatch, "one pseudo mask per batch image required");
  const int classes = static_cast<int>(student.aux_head.size());
  const double inv_batch = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size());

  StepLosses losses;

  // Classification on the global view, main and auxiliary heads.
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const LabeledImage& image = *batch[i];
    const std::vector<int> targets = binary_targets(image.labels, classes);
    const Vec pooled = global_average_pool(image.features);

    for (auto [head, head_grads, slot] :
         {std::tuple{&student.cls_head, grads ? &grads->cls_head : nullptr, &losses.cls},
          std::tuple{&student.aux_head, grads ? &grads->aux_head : nullptr, &losses.cls_aux}}) {
      Vec logits(head->size());
      for (std::size_t l = 0; l < head->size(); ++l) logits[l] = dot((*head)[l], pooled);
      const ScalarLoss ml = multilabel_soft_margin(logits, targets);
      *slot += ml.value * inv_batch;
      if (head_grads)
        for (std::size_t l = 0; l < head->size(); ++l)
          for (std::size_t d = 0; d < pooled.size(); ++d)
            (*head_grads)[l][d] += inv_batch * ml.grad[l] * pooled[d];
    }

    // Dense head against the pseudo mask.
    const int cells = image.features.cells();
    Mat cell_scores(cells, Vec(student.seg_head.size()));
    for (int cell = 0; cell < cells; ++cell) {
      auto x = image.features.cell(cell / image.features.width, cell % image.features.width);
      for (std::size_t l = 0; l < student.seg_head.size(); ++l)
        cell_scores[cell][l] = dot(student.seg_head[l], x);
    }
    const CellLoss sl = seg_cross_entropy(cell_scores, pseudo_masks[i]);
    losses.seg += sl.value * inv_batch;
    // Parameter gradients are of the total objective, hence the gamma factor.
    if (grads)
      for (int cell = 0; cell < cells; ++cell) {
        auto x = image.features.cell(cell / image.features.width, cell % image.features.width);
        for (std::size_t l = 0; l < student.seg_head.size(); ++l) {
          const double coeff = inv_batch * hp.gamma * sl.cell_grads[cell][l];
          if (coeff == 0.0) continue;
          for (std::size_t d = 0; d < x.size(); ++d) grads->seg_head[l][d] += coeff * x[d];
        }
      }
  }

  // Patch views through the student.
  std::vector<Vec> queries(views.size());
  std::vector<EmbedCache> caches(grads ? views.size() : 0);
  for (std::size_t v = 0; v < views.size(); ++v)
    queries[v] = embed(student.encoder, views[v].weak, grads ? &caches[v] : nullptr);

  std::vector<Vec> query_grads(views.size());
  for (std::size_t v = 0; v < views.size(); ++v)
    query_grads[v].assign(queries[v].size(), 0.0);

  if (!flags.disable_lig && !views.empty()) {
    // Per-image candidate sets; pair-weighted combination keeps the loss a
    // plain mean over (query, positive) pairs.
    struct ImageBundle {
      std::vector<std::size_t> view_index;
      LossBundle bundle;
    };
    std::vector<ImageBundle> bundles;
    int total_pairs = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::vector<int> candidate_labels;
      Mat candidate_protos;
      for (int label : batch[i]->labels)
        if (bank.initialized(label)) {
          candidate_labels.push_back(label);
          candidate_protos.push_back(bank.prototype(label));
        }
      if (candidate_labels.empty()) continue;

      ImageBundle ib;
      std::vector<Vec> qs;
      std::vector<int> tags;
      for (std::size_t v = 0; v < views.size(); ++v) {
        if (views[v].image_index != static_cast<int>(i)) continue;
        if (!is_foreground_tag(views[v].tag) || !bank.initialized(views[v].tag)) continue;
        ib.view_index.push_back(v);
        qs.push_back(queries[v]);
        tags.push_back(views[v].tag);
      }
      if (qs.empty()) continue;
      ib.bundle = lig_loss(qs, tags, candidate_labels, candidate_protos, hp.tau_g);
      total_pairs += ib.bundle.positive_pairs;
      bundles.push_back(std::move(ib));
    }
    if (total_pairs > 0) {
      for (const ImageBundle& ib : bundles) {
        const double share = static_cast<double>(ib.bundle.positive_pairs) / total_pairs;
        losses.lig += share * ib.bundle.value;
        for (std::size_t k = 0; k < ib.view_index.size(); ++k) {
          Vec& into = query_grads[ib.view_index[k]];
          const Vec& from = ib.bundle.query_grads[k];
          for (std::size_t d = 0; d < into.size(); ++d)
            into[d] += hp.alpha * share * from[d];
        }
      }
      losses.lig_pairs = total_pairs;
    }
  }

  if (!flags.disable_lil && !views.empty()) {
    std::vector<int> tags(views.size());
    for (std::size_t v = 0; v < views.size(); ++v) tags[v] = views[v].tag;
    const LossBundle bundle = lil_loss(queries, tags, reservoir, hp.tau_l);
    losses.lil = bundle.value;
    losses.lil_pairs = bundle.positive_pairs;
    if (grads && bundle.positive_pairs > 0)
      for (std::size_t v = 0; v < views.size(); ++v)
        for (std::size_t d = 0; d < query_grads[v].size(); ++d)
          query_grads[v][d] += hp.beta * bundle.query_grads[v][d];
  }

  if (grads)
    for (std::size_t v = 0; v < views.size(); ++v) {
      if (!all_finite(query_grads[v])) fail(Errc::non_finite_component, "query gradient");
      embed_backward(student.encoder, caches[v], query_grads[v], grads->encoder);
    }

  losses.total = seco_total(losses.cls, losses.cls_aux, losses.lig, losses.lil, losses.seg,
                            {hp.alpha, hp.beta, hp.gamma});
  if (queries_out) *queries_out = std::move(queries);
  return losses;
}

EncodedViews encode_views(const PatchSet& patches, const EncoderParams& student_encoder,
                          const EncoderParams& teacher_encoder, double epsilon_weak,
                          double epsilon_strong, double dropout_rate, double shift_scale,
                          Rng& rng) {
  EncodedViews views;
  views.weak_grids.reserve(patches.patches.size());
  views.strong_grids.reserve(patches.patches.size());
  for (const Patch& patch : patches.patches) {
    views.weak_grids.push_back(add_noise(patch.features, epsilon_weak, rng));
    FeatureGrid strong = add_noise(patch.features, epsilon_strong, rng);
    drop_channels(strong, dropout_rate, rng);
    if (shift_scale > 0.0) {
      // One random direction shifted across the whole view, the same kind of
      // perturbation a shared context adds to a region.
      Vec shift(strong.channels);
      for (double& x : shift) x = rng.normal();
      shift = l2_normalize(shift);
      for (int cell = 0; cell < strong.cells(); ++cell)
        for (int d = 0; d < strong.channels; ++d)
          strong.data[static_cast<std::size_t>(cell) * strong.channels + d] +=
              shift_scale * shift[d];
    }
    views.strong_grids.push_back(std::move(strong));
  }
  views.raw_code_sum.assign(student_encoder.embed_dim(), 0.0);
  for (std::size_t i = 0; i < views.weak_grids.size(); ++i) {
    EmbedCache cache;
    views.queries.push_back(embed(student_encoder, views.weak_grids[i], &cache));
    for (std::size_t d = 0; d < views.raw_code_sum.size(); ++d)
      views.raw_code_sum[d] += cache.raw_cell_mean[d];
    views.keys.push_back(embed(teacher_encoder, views.strong_grids[i]));
  }
  return views;
}

Evaluation evaluate(const StudentState& student, const PrototypeBank& bank,
                    const std::vector<LabeledImage>& heldout, const Config& cfg) {
  const int classes = cfg.scenario.classes;
  Evaluation eval;

  std::vector<PseudoMask> seg_preds;
  std::vector<PseudoMask> truths;
  for (const LabeledImage& image : heldout) {
    PseudoMask pred(image.features.height, image.features.width, 0);
    for (int r = 0; r < image.features.height; ++r)
      for (int c = 0; c < image.features.width; ++c) {
        auto x = image.features.cell(r, c);
        int best = 0;
        double best_score = dot(student.seg_head[0], x);
        for (int l = 1; l <= classes; ++l) {
          const double score = dot(student.seg_head[l], x);
          if (score > best_score) {
            best_score = score;
            best = l;
          }
        }
        pred.at(r, c) = best;
      }
    seg_preds.push_back(std::move(pred));
    truths.push_back(image.ground_truth);
  }
  eval.seg = route_eval(seg_preds, truths, classes);

  // Nearest-prototype assignment over single-class foreground patches. Cells
  // outside those patches are ignored so the route isolates class confusion.
  if (bank.all_initialized()) {
    std::vector<PseudoMask> proto_preds;
    std::vector<PseudoMask> proto_truths;
    for (const LabeledImage& image : heldout) {
      PseudoMask pred(image.features.height, image.features.width, kIgnoreLabel);
      PseudoMask truth(image.features.height, image.features.width, kIgnoreLabel);
      const PatchSet tiles = decompose_grid(image.features, image.ground_truth,
                                            cfg.scenario.patch_height, cfg.scenario.patch_width);
      for (const Patch& tile : tiles.patches) {
        const int gt_tag = assign_tag(tile.mask, cfg.hyper.phi);
        if (!is_foreground_tag(gt_tag)) continue;
        const Vec q = embed(student.encoder, tile.features);
        int winner = 1;
        double best = cosine_similarity(q, bank.prototype(1));
        for (int l = 2; l <= classes; ++l) {
          const double sim = cosine_similarity(q, bank.prototype(l));
          if (sim > best) {
            best = sim;
            winner = l;
          }
        }
        for (int r = 0; r < tiles.patch_height; ++r)
          for (int c = 0; c < tiles.patch_width; ++c) {
            pred.at(tile.origin_row + r, tile.origin_col + c) = winner;
            truth.at(tile.origin_row + r, tile.origin_col + c) = gt_tag;
          }
      }
      proto_preds.push_back(std::move(pred));
      proto_truths.push_back(std::move(truth));
    }
    eval.proto = route_eval(proto_preds, proto_truths, classes);
  }
  return eval;
}

namespace {

struct TrainLoop {
  const Config& cfg;
  const TrainFlags& flags;
  const ScenarioSampler sampler;
  std::vector<LabeledImage> dataset;
  std::vector<LabeledImage> heldout;
  StudentState student;
  EmaParams teacher;
  PrototypeBank bank;
  TagReservoir reservoir;
  Rng loop_rng;

  explicit TrainLoop(const Config& config, const TrainFlags& train_flags)
      : cfg(config),
        flags(train_flags),
        sampler(config.scenario),
        dataset(sampler.training_set()),
        heldout(sampler.heldout_set()),
        student(make_student(config)),
        teacher{student.encoder.flatten(), config.hyper.ema_momentum},
        bank(config.scenario.classes, config.scenario.embed_dim),
        reservoir(config.hyper.reservoir_capacity),
        loop_rng(config.scenario.seed, kLoopStream) {}

  static StudentState make_student(const Config& config) {
    Rng rng(config.scenario.seed, kInitStream);
    return StudentState::init(config, rng);
  }

  StepMetrics step(const std::vector<std::size_t>& indices, double lr) {
    const Hyperparams& hp = cfg.hyper;
    std::vector<const LabeledImage*> batch;
    for (std::size_t index : indices) batch.push_back(&dataset[index]);

    // (1) Global view: class tokens for the bank update.
    std::vector<ClassToken> tokens;
    Vec raw_sum(student.encoder.embed_dim(), 0.0);
    std::size_t raw_count = 0;
    for (const LabeledImage* image : batch) {
      EmbedCache cache;
      tokens.push_back({embed(student.encoder, image->features, &cache), image->labels});
      for (std::size_t d = 0; d < raw_sum.size(); ++d) raw_sum[d] += cache.raw_cell_mean[d];
      ++raw_count;
    }

    // (2) Auxiliary activation maps -> pseudo masks -> tagged patches.
    std::vector<PseudoMask> pseudo_masks;
    std::vector<ContrastView> views;
    PatchSet all_patches;
    all_patches.patch_height = cfg.scenario.patch_height;
    all_patches.patch_width = cfg.scenario.patch_width;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const LabeledImage& image = *batch[i];
      const CamGrid cam = compute_cam(image.features, student.aux_head);
      pseudo_masks.push_back(
          cam_to_pseudo_mask(cam, image.labels, hp.theta_low, hp.theta_high));
      PatchSet patches =
          decompose_random(image.features, pseudo_masks.back(), cfg.scenario.patch_height,
                           cfg.scenario.patch_width, cfg.scenario.patches_per_image, loop_rng);
      const std::vector<int> tags = assign_tags(patches, hp.phi);
      for (std::size_t p = 0; p < patches.patches.size(); ++p) {
        views.push_back({FeatureGrid{}, tags[p], static_cast<int>(i)});
        all_patches.patches.push_back(std::move(patches.patches[p]));
      }
    }

    // (3) Two augmented views per patch.
    EncoderParams teacher_encoder =
        EncoderParams::from_flat(teacher.values, student.encoder.input_dim(),
                                 student.encoder.hidden_dim(), student.encoder.embed_dim());
    teacher_encoder.center = student.encoder.center;  // one shared center
    EncodedViews encoded =
        encode_views(all_patches, student.encoder, teacher_encoder, hp.epsilon_weak,
                     hp.epsilon_strong, hp.strong_dropout, hp.epsilon_shift, loop_rng);
    for (std::size_t v = 0; v < views.size(); ++v)
      views[v].weak = std::move(encoded.weak_grids[v]);

    // (4) Similarity-based tag rectification against the reservoir snapshot.
    StepMetrics metrics;
    for (std::size_t v = 0; v < views.size(); ++v) {
      ContrastView& view = views[v];
      if (is_foreground_tag(view.tag) && !flags.disable_rectify) {
        const std::vector<Vec> positives = reservoir.positives(view.tag);
        if (static_cast<int>(positives.size()) >= hp.rectify_min_positives) {
          const int rectified = rectify_tag(encoded.queries[v], view.tag, positives, hp.sigma);
          if (rectified != view.tag) {
            view.tag = rectified;
            ++metrics.rectified;
          }
        }
      }
      if (view.tag == kUncertainTag)
        ++metrics.tags_uncertain;
      else if (view.tag == kBackgroundTag)
        ++metrics.tags_background;
      else
        ++metrics.tags_class;
    }

    // (5)-(7) Losses, gradients, one SGD step on the student.
    ParamGrads grads = ParamGrads::zeros_like(student);
    std::vector<Vec> queries;
    const StepLosses losses = compute_losses(student, batch, pseudo_masks, views, bank,
                                             reservoir, hp, flags, &grads, &queries);
    metrics.cls = losses.cls;
    metrics.cls_aux = losses.cls_aux;
    metrics.lig = losses.lig;
    metrics.lil = losses.lil;
    metrics.seg = losses.seg;
    metrics.total = losses.total;

    apply_update(grads, lr);

    // (8) Bank, reservoir, local teacher.
    update_bank(bank, tokens, hp.eta);
    std::vector<TaggedEmbedding> push_queries;
    std::vector<TaggedEmbedding> push_keys;
    for (std::size_t v = 0; v < views.size(); ++v) {
      push_queries.push_back({queries[v], views[v].tag});
      push_keys.push_back({encoded.keys[v], views[v].tag});
    }
    reservoir.push_batch(push_queries, push_keys);
    ema_update(teacher.values, student.encoder.flatten(), hp.ema_momentum);

    for (std::size_t d = 0; d < encoded.raw_code_sum.size(); ++d)
      raw_sum[d] += encoded.raw_code_sum[d];
    raw_count += views.size();
    if (raw_count > 0 && hp.center_momentum < 1.0)
      for (std::size_t d = 0; d < student.encoder.center.size(); ++d)
        student.encoder.center[d] = hp.center_momentum * student.encoder.center[d] +
                                    (1.0 - hp.center_momentum) * raw_sum[d] / raw_count;
    return metrics;
  }

  void apply_update(const ParamGrads& grads, double lr) {
    const double decay = cfg.hyper.weight_decay;
    auto step_mat = [lr](Mat& params, const Mat& grad) { axpy_mat(params, grad, -lr); };
    auto step_vec = [lr](Vec& params, const Vec& grad) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
    };
    // Decay on the encoder matrices bleeds off gradient-dead shared
    // directions that would otherwise pull all embeddings into one cone.
    auto decay_mat = [lr, decay](Mat& params) {
      if (decay == 0.0) return;
      for (Vec& row : params)
        for (double& x : row) x -= lr * decay * x;
    };
    decay_mat(student.encoder.w1);
    decay_mat(student.encoder.w2);
    decay_mat(student.encoder.wp);
    step_mat(student.encoder.w1, grads.encoder.w1);
    step_vec(student.encoder.b1, grads.encoder.b1);
    step_mat(student.encoder.w2, grads.encoder.w2);
    step_mat(student.encoder.wp, grads.encoder.wp);
    step_mat(student.aux_head, grads.aux_head);
    step_mat(student.cls_head, grads.cls_head);
    step_mat(student.seg_head, grads.seg_head);
  }
};

}  // namespace

TrainOutcome train(const Config& cfg, const TrainFlags& flags) {
  validate(cfg);
  TrainLoop loop(cfg, flags);

  TrainReport report;
  report.config = cfg;
  report.flags = flags;
  report.initial_eval = evaluate(loop.student, loop.bank, loop.heldout, cfg);

  const Hyperparams& hp = cfg.hyper;
  const std::size_t images = loop.dataset.size();
  const std::size_t steps_per_epoch =
      (images + hp.batch_size - 1) / static_cast<std::size_t>(hp.batch_size);
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(hp.epochs);

  std::vector<std::size_t> order(images);
  std::iota(order.begin(), order.end(), 0);

  std::size_t step_index = 0;
  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    loop.loop_rng.shuffle(order);

    StepMetrics sums;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < images; start += hp.batch_size) {
      const std::size_t stop = std::min(images, start + hp.batch_size);
      std::vector<std::size_t> indices(order.begin() + start, order.begin() + stop);
      double lr = hp.learning_rate;
      if (hp.cosine_decay && total_steps > 0)
        lr *= 0.5 * (1.0 + std::cos(3.14159265358979323846 * static_cast<double>(step_index) /
                                    static_cast<double>(total_steps)));
      const StepMetrics metrics = loop.step(indices, lr);
      ++step_index;
      ++steps;
      sums.cls += metrics.cls;
      sums.cls_aux += metrics.cls_aux;
      sums.lig += metrics.lig;
      sums.lil += metrics.lil;
      sums.seg += metrics.seg;
      sums.total += metrics.total;
      sums.tags_background += metrics.tags_background;
      sums.tags_class += metrics.tags_class;
      sums.tags_uncertain += metrics.tags_uncertain;
      sums.rectified += metrics.rectified;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.stats = sums;
    if (steps > 0) {
      record.stats.cls /= steps;
      record.stats.cls_aux /= steps;
      record.stats.lig /= steps;
      record.stats.lil /= steps;
      record.stats.seg /= steps;
      record.stats.total /= steps;
    }
    record.reservoir_size = loop.reservoir.size();
    record.reservoir_occupancy = loop.reservoir.occupancy();
    record.prototypes_initialized = loop.bank.initialized_count();
    if (loop.bank.all_initialized())
      record.prototype_max_offdiag = max_off_diagonal(similarity_matrix(loop.bank));
    record.eval = evaluate(loop.student, loop.bank, loop.heldout, cfg);
    report.records.push_back(std::move(record));
  }

  if (loop.bank.all_initialized()) report.final_similarity = similarity_matrix(loop.bank);

  return TrainOutcome{std::move(report), std::move(loop.student), std::move(loop.teacher),
                      std::move(loop.bank)};
}

}  // namespace seco
