#include "seco/metrics.hpp"

namespace seco {
namespace {

void check_label(int label, int classes) {
  if (label < 0 || label > classes) fail(Errc::shape_mismatch, "class label outside 0..K");
}

}  // namespace

std::vector<ConfusionCounts> accumulate_confusion(const std::vector<PseudoMask>& pred,
                                                  const std::vector<PseudoMask>& gt, int classes) {
  if (pred.size() != gt.size()) fail(Errc::shape_mismatch, "prediction/truth list sizes differ");
  std::vector<ConfusionCounts> counts(classes + 1);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const PseudoMask& p = pred[i];
    const PseudoMask& g = gt[i];
    if (p.height != g.height || p.width != g.width)
      fail(Errc::shape_mismatch, "prediction/truth mask shapes differ");
    for (std::size_t cell = 0; cell < g.labels.size(); ++cell) {
      const int truth = g.labels[cell];
      if (truth == kIgnoreLabel) continue;
      check_label(truth, classes);
      const int guess = p.labels[cell];
      if (guess != kIgnoreLabel) check_label(guess, classes);
      if (guess == truth) {
        ++counts[truth].tp;
      } else {
        ++counts[truth].fn;
        if (guess != kIgnoreLabel) ++counts[guess].fp;
      }
    }
  }
  return counts;
}

IouResult miou(const std::vector<PseudoMask>& pred, const std::vector<PseudoMask>& gt,
               int classes) {
  const auto counts = accumulate_confusion(pred, gt, classes);
  IouResult result;
  result.per_class.resize(counts.size());
  double sum = 0.0;
  int present = 0;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    const auto& c = counts[l];
    const std::uint64_t joined = c.tp + c.fp + c.fn;
    if (joined == 0) continue;  // class absent from both: excluded from the mean
    result.per_class[l] = static_cast<double>(c.tp) / static_cast<double>(joined);
    sum += *result.per_class[l];
    ++present;
  }
  result.mean = present > 0 ? sum / present : 0.0;
  return result;
}

double confusion_ratio(const std::vector<PseudoMask>& pred, const std::vector<PseudoMask>& gt,
                       int label) {
  int classes = label;
  for (const PseudoMask& mask : gt)
    for (int cell : mask.labels) classes = std::max(classes, cell);
  const auto counts = accumulate_confusion(pred, gt, classes);
  const auto& c = counts[label];
  if (c.tp == 0) fail(Errc::no_true_positives, "confusion ratio undefined without true positives");
  return static_cast<double>(c.fp) / static_cast<double>(c.tp);
}

PrecisionRecall precision_recall(const std::vector<PseudoMask>& pred,
                                 const std::vector<PseudoMask>& gt, int label) {
  int classes = label;
  for (const PseudoMask& mask : gt)
    for (int cell : mask.labels) classes = std::max(classes, cell);
  const auto counts = accumulate_confusion(pred, gt, classes);
  const auto& c = counts[label];
  PrecisionRecall result;
  if (c.tp + c.fp > 0) result.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
  if (c.tp + c.fn > 0) result.recall = static_cast<double>(c.tp) / (c.tp + c.fn);
  return result;
}

Mat patch_prototype_similarity(const std::vector<Vec>& embeddings, const PrototypeBank& bank) {
  if (!bank.all_initialized())
    fail(Errc::uninitialized_prototype, "similarity needs a fully initialized bank");
  Mat matrix(embeddings.size(), Vec(bank.classes(), 0.0));
  for (std::size_t i = 0; i < embeddings.size(); ++i)
    for (int l = 1; l <= bank.classes(); ++l)
      matrix[i][l - 1] = cosine_similarity(embeddings[i], bank.prototype(l));
  return matrix;
}

}  // namespace seco
