#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pgdqn/replay/replay_buffer.hpp"

using namespace pgdqn;

TEST_SUITE_BEGIN("replay");

namespace {

Transition numbered(int id) {
  Transition t;
  t.state = {static_cast<double>(id)};
  t.next_state = {static_cast<double>(id) + 0.5};
  t.action = id % 3;
  t.reward = id;
  return t;
}

}  // namespace

TEST_CASE("ring eviction is strictly FIFO") {
  ReplayBuffer buf(3);
  for (int i = 1; i <= 4; ++i) buf.push(numbered(i));
  CHECK(buf.size() == 3);
  CHECK(buf.oldest_first(0).state[0] == 2.0);
  CHECK(buf.oldest_first(1).state[0] == 3.0);
  CHECK(buf.oldest_first(2).state[0] == 4.0);

  for (int i = 5; i <= 9; ++i) buf.push(numbered(i));
  CHECK(buf.oldest_first(0).state[0] == 7.0);
  CHECK(buf.oldest_first(2).state[0] == 9.0);
}

TEST_CASE("size never exceeds capacity") {
  ReplayBuffer buf(64);
  for (int i = 0; i < 100000; ++i) {
    buf.push(numbered(i));
    CHECK(buf.size() <= 64);
  }
  CHECK(buf.size() == 64);
}

TEST_CASE("sampling semantics") {
  Prng rng(1);
  ReplayBuffer buf(8);
  buf.push(numbered(42));

  SUBCASE("with replacement, a single item repeats") {
    auto batch = buf.sample(4, rng);
    CHECK(batch.size() == 4);
    for (const Transition* t : batch) CHECK(t->state[0] == 42.0);
  }
  SUBCASE("push then sample of size one returns that item") {
    auto batch = buf.sample(1, rng);
    CHECK(batch[0]->reward == 42.0);
  }
  SUBCASE("distinct draws beyond the fill are rejected") {
    CHECK_THROWS_AS(buf.sample(2, rng, /*with_replacement=*/false), std::invalid_argument);
    ReplayBuffer empty(4);
    CHECK_THROWS_AS(empty.sample(1, rng), std::invalid_argument);
  }
  SUBCASE("non-finite rewards are rejected at push") {
    Transition bad = numbered(1);
    bad.reward = std::nan("");
    CHECK_THROWS_AS(buf.push(bad), std::invalid_argument);
  }
}

TEST_CASE("identical rng state gives identical batch indices") {
  ReplayBuffer buf(32);
  for (int i = 0; i < 32; ++i) buf.push(numbered(i));
  Prng a(9), b(9);
  CHECK(buf.sample_indices(16, a) == buf.sample_indices(16, b));

  Prng c(9), d(9);
  CHECK(buf.sample_indices(16, c, false) == buf.sample_indices(16, d, false));
}

TEST_CASE("without-replacement draws are distinct") {
  ReplayBuffer buf(32);
  for (int i = 0; i < 32; ++i) buf.push(numbered(i));
  Prng rng(4);
  auto idx = buf.sample_indices(32, rng, false);
  std::vector<bool> seen(32, false);
  for (std::size_t i : idx) {
    CHECK(!seen[i]);
    seen[i] = true;
  }
}

TEST_CASE("uniformity: frequencies within 1.5% over 1e5 draws from 10 slots") {
  ReplayBuffer buf(10);
  for (int i = 0; i < 10; ++i) buf.push(numbered(i));
  Prng rng(7);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (std::size_t i : buf.sample_indices(n, rng)) ++counts[i];
  for (int c : counts) {
    const double freq = static_cast<double>(c) / n;
    CHECK(std::abs(freq - 0.10) <= 0.015);
  }
}

TEST_CASE("uniformity: chi-square over a 16-slot buffer does not reject at alpha 0.001") {
  ReplayBuffer buf(16);
  for (int i = 0; i < 16; ++i) buf.push(numbered(i));
  Prng rng(12);
  std::vector<int> counts(16, 0);
  const int n = 100000;
  for (std::size_t i : buf.sample_indices(n, rng)) ++counts[i];
  const double expected = static_cast<double>(n) / 16.0;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // df = 15, upper critical value at alpha = 0.001.
  CHECK(chi2 <= 37.697);
}

TEST_SUITE_END();
