#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fgssl/errors.hpp"

namespace fgssl {

// splitmix64 finalizer; full avalanche on 64 bits.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream id from a root seed and a purpose path such as
// {stream::kCrop, epoch, sample_id}. Streams with different paths never
// share draws, so adding consumers to one stream cannot shift another.
inline uint64_t derive_stream(uint64_t seed, std::initializer_list<uint64_t> path) {
  uint64_t h = mix64(seed);
  for (uint64_t p : path) h = mix64(h ^ mix64(p));
  return h;
}

namespace stream {
inline constexpr uint64_t kInit = 1;       // parameter initialization
inline constexpr uint64_t kShuffle = 2;    // per-epoch visit order
inline constexpr uint64_t kCrop = 3;       // training crop offsets
inline constexpr uint64_t kRegion = 4;     // region shuffle permutations
inline constexpr uint64_t kPatches = 5;    // jigsaw patch transform
inline constexpr uint64_t kNegatives = 6;  // memory bank negative draws
inline constexpr uint64_t kBank = 7;       // memory bank initialization
inline constexpr uint64_t kMask = 8;       // activation suppression masks
inline constexpr uint64_t kSplit = 9;      // label-fraction subset draw
inline constexpr uint64_t kData = 10;      // synthetic data generation
}  // namespace stream

// Deterministic generator: a fixed engine plus hand-rolled distributions,
// because the standard distributions are not bit-stable across library
// implementations. Same seed, same call sequence, same platform-independent
// draws.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    FGSSL_CHECK(lo <= hi, "uniform: empty range");
    return lo + (hi - lo) * uniform();
  }

  // Inclusive on both ends, rejection-sampled so the result is unbiased.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    FGSSL_CHECK(lo <= hi, "uniform_int: empty range");
    const uint64_t n = static_cast<uint64_t>(hi - lo) + 1;
    if (n == 0) return static_cast<int64_t>(next_u64());  // full 64-bit range
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return lo + static_cast<int64_t>(r % n);
  }

  // Box-Muller; generates pairs and caches the second value.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]; keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) {
    FGSSL_CHECK(p >= 0.0 && p <= 1.0, "bernoulli: p outside [0,1]");
    return uniform() < p;
  }

  // Fisher-Yates, high index down.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
      const int64_t j = uniform_int(0, i);
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
    }
  }

  std::vector<int64_t> permutation(int64_t n) {
    std::vector<int64_t> p(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
    shuffle(p);
    return p;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// FNV-1a over bytes; used to give each named parameter its own init stream
// and to fingerprint serialized configs.
inline uint64_t fnv1a64(const void* data, size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace fgssl
