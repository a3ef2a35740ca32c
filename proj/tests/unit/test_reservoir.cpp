#include "doctest.h"
#include "seco/reservoir.hpp"
#include "seco/rng.hpp"
#include "seco/tagging.hpp"

using namespace seco;

namespace {

TaggedEmbedding unit_x(int tag) { return {Vec{1.0, 0.0}, tag}; }
TaggedEmbedding unit_y(int tag) { return {Vec{0.0, 1.0}, tag}; }

}  // namespace

TEST_CASE("push evicts the oldest entries first") {
  TagReservoir res(4);
  res.push_batch({unit_x(1), unit_x(2)}, {unit_y(1), unit_y(2)});
  // Queue now: a=q1, b=q2, c=k1, d=k2. Push one more pair: evict a, b.
  res.push_batch({unit_x(3)}, {unit_y(3)});
  REQUIRE(res.size() == 4);
  const auto& q = res.entries();
  CHECK(q[0].tag == 1);
  CHECK(q[0].embedding == Vec{0.0, 1.0});  // the old k1
  CHECK(q[1].tag == 2);
  CHECK(q[2].tag == 3);
  CHECK(q[2].embedding == Vec{1.0, 0.0});  // the new q3
  CHECK(q[3].tag == 3);
}

TEST_CASE("pushing into an empty reservoir keeps queries before keys") {
  TagReservoir res(8);
  res.push_batch({unit_x(1), unit_x(2)}, {unit_y(1), unit_y(2)});
  const auto& q = res.entries();
  CHECK(q[0].embedding == Vec{1.0, 0.0});
  CHECK(q[1].embedding == Vec{1.0, 0.0});
  CHECK(q[2].embedding == Vec{0.0, 1.0});
  CHECK(q[3].embedding == Vec{0.0, 1.0});
}

TEST_CASE("default reservoir capacity is accepted") {
  TagReservoir res(4608);
  CHECK(res.capacity() == 4608);
}

TEST_CASE("positives filter by tag in FIFO order") {
  TagReservoir res(32);
  CHECK(res.positives(2).empty());

  std::vector<TaggedEmbedding> qs, ks;
  for (int i = 0; i < 5; ++i) {
    qs.push_back(unit_x(i == 1 || i == 3 ? 2 : 1));
    ks.push_back(unit_y(i == 1 || i == 3 ? 2 : 1));
  }
  res.push_batch(qs, ks);
  CHECK(res.positives(2).size() == 4);   // two queries + two keys
  CHECK(res.positives(1).size() == 6);
  CHECK(res.positives(7).empty());

  TagReservoir all_same(16);
  all_same.push_batch({unit_x(3), unit_x(3)}, {unit_y(3), unit_y(3)});
  CHECK(all_same.positives(3).size() == all_same.size());
}

TEST_CASE("occupancy partitions the queue") {
  TagReservoir res(32);
  res.push_batch({unit_x(1), unit_x(kBackgroundTag), unit_x(kUncertainTag)},
                 {unit_y(1), unit_y(kBackgroundTag), unit_y(kUncertainTag)});
  const auto counts = res.occupancy();
  std::size_t total = 0;
  for (const auto& [tag, count] : counts) total += count;
  CHECK(total == res.size());
  CHECK(counts.at(1) == 2);
  CHECK(counts.at(kBackgroundTag) == 2);
  CHECK(counts.at(kUncertainTag) == 2);
}

TEST_CASE("insert indices increase front to back across pushes") {
  TagReservoir res(6);
  Rng rng(91);
  for (int round = 0; round < 10; ++round) {
    std::vector<TaggedEmbedding> qs, ks;
    const int pairs = rng.uniform_int(1, 3);
    for (int i = 0; i < pairs; ++i) {
      qs.push_back(unit_x(rng.uniform_int(-1, 2)));
      ks.push_back(unit_y(qs.back().tag));
    }
    res.push_batch(qs, ks);
    std::uint64_t last = 0;
    bool first = true;
    for (const ReservoirEntry& entry : res.entries()) {
      if (!first) CHECK(entry.insert_index > last);
      last = entry.insert_index;
      first = false;
    }
  }
}

TEST_CASE("reservoir error cases") {
  TagReservoir res(4);
  try {
    res.push_batch({unit_x(1), unit_x(1), unit_x(1)}, {unit_y(1), unit_y(1), unit_y(1)});
    FAIL("expected BatchExceedsCapacity");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::batch_exceeds_capacity);
  }
  try {
    res.push_batch({unit_x(1)}, {unit_y(2)});
    FAIL("expected tag mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::shape_mismatch);
  }
  try {
    res.push_batch({{Vec{2.0, 0.0}, 1}}, {unit_y(1)});
    FAIL("expected NotNormalized");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_normalized);
  }
}

TEST_CASE("EMA update endpoints and small steps") {
  std::vector<double> teacher{1.0, -2.0};
  ema_update(teacher, std::vector<double>{3.0, 4.0}, 1.0);
  CHECK(teacher == std::vector<double>{1.0, -2.0});

  ema_update(teacher, std::vector<double>{3.0, 4.0}, 0.0);
  CHECK(teacher == std::vector<double>{3.0, 4.0});

  std::vector<double> zero{0.0};
  ema_update(zero, std::vector<double>{1.0}, 0.999);
  CHECK(zero[0] == doctest::Approx(0.001).epsilon(1e-12));

  try {
    ema_update(zero, std::vector<double>{1.0, 2.0}, 0.5);
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::length_mismatch);
  }
}
