#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "seco/numerics.hpp"

namespace seco {

struct TaggedEmbedding {
  Vec embedding;  // unit norm
  int tag = 0;
};

struct ReservoirEntry {
  Vec embedding;
  int tag = 0;
  std::uint64_t insert_index = 0;
};

/// Fixed-capacity FIFO of (embedding, tag) pairs. Both views of a batch are
/// enqueued (queries first, then keys) and the oldest entries are evicted once
/// the capacity is exceeded.
class TagReservoir {
 public:
  explicit TagReservoir(std::size_t capacity);

  /// Restore a reservoir to a known state (oldest entry first).
  static TagReservoir from_entries(std::size_t capacity,
                                   const std::vector<TaggedEmbedding>& entries);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return queue_.size(); }
  const std::deque<ReservoirEntry>& entries() const { return queue_; }

  void push_batch(const std::vector<TaggedEmbedding>& queries,
                  const std::vector<TaggedEmbedding>& keys);

  /// Stored embeddings whose tag equals the query tag, in FIFO order.
  std::vector<Vec> positives(int tag) const;

  /// Entry count per tag value.
  std::map<int, std::size_t> occupancy() const;

 private:
  void enqueue(const TaggedEmbedding& item);

  std::size_t capacity_;
  std::uint64_t next_index_ = 0;
  std::deque<ReservoirEntry> queue_;
};

/// Flat parameter vector of the local teacher plus its EMA momentum.
struct EmaParams {
  std::vector<double> values;
  double momentum = 0.999;
};

/// teacher <- m * teacher + (1 - m) * student, elementwise.
void ema_update(std::vector<double>& teacher, std::span<const double> student, double momentum);

}  // namespace seco
