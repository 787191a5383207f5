#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "fgssl/rng.hpp"

using namespace fgssl;

TEST_CASE("same seed reproduces the same draw sequence") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(42), d(43);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) {
    all_equal = all_equal && (c.next_u64() == d.next_u64());
  }
  CHECK_FALSE(all_equal);
}

TEST_CASE("uniform stays in [0,1) and fills the range") {
  Rng r(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("uniform_int covers both endpoints without bias spikes") {
  Rng r(9);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const int64_t v = r.uniform_int(-2, 3);
    REQUIRE(v >= -2);
    REQUIRE(v <= 3);
    counts[static_cast<size_t>(v + 2)]++;
  }
  for (int c : counts) {
    CHECK(c > 9000);
    CHECK(c < 11000);
  }
}

TEST_CASE("normal has roughly unit moments") {
  Rng r(11);
  double sum = 0.0, sq = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("bernoulli respects p and rejects bad p") {
  Rng r(13);
  int hits = 0;
  for (int i = 0; i < 20000; ++i) hits += r.bernoulli(0.2) ? 1 : 0;
  CHECK(hits > 3700);
  CHECK(hits < 4300);
  CHECK(r.bernoulli(0.0) == false);
  CHECK(r.bernoulli(1.0) == true);
  CHECK_THROWS(r.bernoulli(1.5));
}

TEST_CASE("permutation is a bijection") {
  Rng r(17);
  auto p = r.permutation(100);
  std::set<int64_t> seen(p.begin(), p.end());
  CHECK(seen.size() == 100);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 99);
}

TEST_CASE("derived streams differ per purpose and per index") {
  const uint64_t seed = 5;
  const uint64_t a = derive_stream(seed, {stream::kCrop, 0, 0});
  const uint64_t b = derive_stream(seed, {stream::kCrop, 0, 1});
  const uint64_t c = derive_stream(seed, {stream::kRegion, 0, 0});
  CHECK(a != b);
  CHECK(a != c);
  CHECK(b != c);
  CHECK(derive_stream(seed, {stream::kCrop, 0, 0}) == a);
}
