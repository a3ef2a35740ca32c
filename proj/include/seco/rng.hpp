#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace seco {

/// Deterministic random stream. Sampling is hand-rolled on top of
/// std::mt19937_64 so sequences are identical across standard libraries
/// (the engine is pinned by the standard, the distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform01();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();  // standard normal via Box-Muller
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  int uniform_int(int lo, int hi);  // inclusive bounds

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace seco
