#include "seco/reservoir.hpp"

#include <cmath>

namespace seco {

TagReservoir::TagReservoir(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) fail(Errc::invalid_config, "reservoir capacity must be positive");
}

TagReservoir TagReservoir::from_entries(std::size_t capacity,
                                        const std::vector<TaggedEmbedding>& entries) {
  TagReservoir reservoir(capacity);
  if (entries.size() > capacity)
    fail(Errc::batch_exceeds_capacity, "restored state exceeds the reservoir capacity");
  for (const TaggedEmbedding& entry : entries) reservoir.enqueue(entry);
  return reservoir;
}

void TagReservoir::enqueue(const TaggedEmbedding& item) {
  if (std::abs(l2_norm(item.embedding) - 1.0) > 1e-9)
    fail(Errc::not_normalized, "reservoir embeddings must be unit norm");
  queue_.push_back({item.embedding, item.tag, next_index_++});
}

void TagReservoir::push_batch(const std::vector<TaggedEmbedding>& queries,
                              const std::vector<TaggedEmbedding>& keys) {
  if (queries.size() != keys.size())
    fail(Errc::shape_mismatch, "query and key batches differ in size");
  for (std::size_t i = 0; i < queries.size(); ++i)
    if (queries[i].tag != keys[i].tag)
      fail(Errc::shape_mismatch, "query/key tags disagree at batch index " + std::to_string(i));
  if (2 * queries.size() > capacity_)
    fail(Errc::batch_exceeds_capacity, "both views of the batch must fit the reservoir");

  for (const TaggedEmbedding& q : queries) enqueue(q);
  for (const TaggedEmbedding& k : keys) enqueue(k);
  while (queue_.size() > capacity_) queue_.pop_front();
}

std::vector<Vec> TagReservoir::positives(int tag) const {
  std::vector<Vec> out;
  for (const ReservoirEntry& entry : queue_)
    if (entry.tag == tag) out.push_back(entry.embedding);
  return out;
}

std::map<int, std::size_t> TagReservoir::occupancy() const {
  std::map<int, std::size_t> counts;
  for (const ReservoirEntry& entry : queue_) ++counts[entry.tag];
  return counts;
}

void ema_update(std::vector<double>& teacher, std::span<const double> student, double momentum) {
  if (teacher.size() != student.size())
    fail(Errc::length_mismatch, "teacher/student parameter lengths differ");
  if (!(momentum >= 0.0 && momentum <= 1.0))
    fail(Errc::invalid_threshold, "EMA momentum must be in [0,1]");
  for (std::size_t i = 0; i < teacher.size(); ++i)
    teacher[i] = momentum * teacher[i] + (1.0 - momentum) * student[i];
}

}  // namespace seco
