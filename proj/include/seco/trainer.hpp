#pragma once

#include <map>
#include <optional>
#include <vector>

#include "seco/cam.hpp"
#include "seco/config.hpp"
#include "seco/decomposition.hpp"
#include "seco/encoder.hpp"
#include "seco/losses.hpp"
#include "seco/metrics.hpp"
#include "seco/prototypes.hpp"
#include "seco/rectification.hpp"
#include "seco/reservoir.hpp"
#include "seco/scenario.hpp"
#include "seco/tagging.hpp"

namespace seco {

/// Student parameters. The global teacher shares the encoder (it is a view of
/// the same weights); the local teacher follows by EMA.
struct StudentState {
  EncoderParams encoder;
  Mat aux_head;  // K x D, source of the auxiliary activation maps
  Mat cls_head;  // K x D
  Mat seg_head;  // (K+1) x D per-cell classifier

  static StudentState init(const Config& cfg, Rng& rng);
};

struct ParamGrads {
  EncoderGrads encoder;
  Mat aux_head;
  Mat cls_head;
  Mat seg_head;

  static ParamGrads zeros_like(const StudentState& student);
};

struct EvalClassRow {
  int label = 0;
  std::optional<double> iou;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> confusion;  // fp / tp
};

struct RouteEval {
  double miou = 0.0;
  std::vector<EvalClassRow> per_class;
};

struct Evaluation {
  RouteEval seg;                   // per-cell argmax of the segmentation head
  std::optional<RouteEval> proto;  // nearest-prototype patch assignment over
                                   // single-class foreground patches
};

struct StepMetrics {
  double cls = 0.0, cls_aux = 0.0, lig = 0.0, lil = 0.0, seg = 0.0, total = 0.0;
  int tags_background = 0, tags_class = 0, tags_uncertain = 0;
  int rectified = 0;
};

struct EpochRecord {
  int epoch = 0;
  StepMetrics stats;  // loss fields are per-step means, counts are sums
  std::size_t reservoir_size = 0;
  std::map<int, std::size_t> reservoir_occupancy;
  int prototypes_initialized = 0;
  std::optional<double> prototype_max_offdiag;
  Evaluation eval;
};

struct TrainReport {
  Config config;
  TrainFlags flags;
  Evaluation initial_eval;
  std::vector<EpochRecord> records;
  std::optional<Mat> final_similarity;
};

struct TrainOutcome {
  TrainReport report;
  StudentState student;
  EmaParams teacher;
  PrototypeBank bank;
};

/// One weak-augmented patch view with its (possibly rectified) tag.
struct ContrastView {
  FeatureGrid weak;
  int tag = kUncertainTag;
  int image_index = 0;
};

struct StepLosses {
  double cls = 0.0, cls_aux = 0.0, lig = 0.0, lil = 0.0, seg = 0.0, total = 0.0;
  int lig_pairs = 0, lil_pairs = 0;
};

/// Deterministic differentiable core of one training step: classification and
/// segmentation losses on the batch images plus the two contrastive losses on
/// the patch views, with analytic parameter gradients. Discrete inputs
/// (pseudo masks, tags) are taken as given.
StepLosses compute_losses(const StudentState& student,
                          const std::vector<const LabeledImage*>& batch,
                          const std::vector<PseudoMask>& pseudo_masks,
                          const std::vector<ContrastView>& views, const PrototypeBank& bank,
                          const TagReservoir& reservoir, const Hyperparams& hp,
                          const TrainFlags& flags, ParamGrads* grads = nullptr,
                          std::vector<Vec>* queries_out = nullptr);

struct EncodedViews {
  std::vector<FeatureGrid> weak_grids;
  std::vector<FeatureGrid> strong_grids;
  std::vector<Vec> queries;    // student on weak views
  std::vector<Vec> keys;       // local teacher on strong views
  Vec raw_code_sum;            // query-side mean raw cell codes
};

/// Weak views (additive noise epsilon_weak) feed the student; strong views
/// (noise epsilon_strong, channel dropout, and a shared-direction shift of
/// scale epsilon_shift) feed the local teacher.
EncodedViews encode_views(const PatchSet& patches, const EncoderParams& student_encoder,
                          const EncoderParams& teacher_encoder, double epsilon_weak,
                          double epsilon_strong, double dropout_rate, double shift_scale,
                          Rng& rng);

Evaluation evaluate(const StudentState& student, const PrototypeBank& bank,
                    const std::vector<LabeledImage>& heldout, const Config& cfg);

TrainOutcome train(const Config& cfg, const TrainFlags& flags = {});

}  // namespace seco
