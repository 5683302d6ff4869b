// Deterministic RNG. Distributions are implemented here rather than taken
// from <random> so that a given seed produces the same stream on every
// standard library / platform; reproducibility of manifests, batches and
// metric CSVs depends on it.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace kws {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed)
      : gen_(splitmix64(seed)), seed_hash_(splitmix64(seed ^ 0xa5a5a5a5a5a5a5a5ULL)) {}

  uint64_t next_u64() { return gen_(); }

  // Unbiased integer in [0, n) via rejection.
  uint64_t below(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  // Uniform in [0, 1) with 53 bits of entropy.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second draw.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<uint64_t>(last - first);
    for (uint64_t i = n; i > 1; --i) {
      const uint64_t j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

  // k distinct indices drawn from [0, n), in draw order.
  std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = 0; i < k; ++i) {
      const size_t j = i + static_cast<size_t>(below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

  // Independent child stream; forking does not disturb this stream's state.
  Rng fork(uint64_t stream_id) const {
    Rng child(0);
    child.gen_.seed(splitmix64(seed_hash_ ^ splitmix64(stream_id)));
    child.seed_hash_ = splitmix64(seed_hash_ + stream_id);
    return child;
  }

 private:
  std::mt19937_64 gen_;
  uint64_t seed_hash_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace kws
