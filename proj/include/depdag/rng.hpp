#pragma once

#include <cstdint>
#include <random>

namespace depdag {

// splitmix64 step, used for seed mixing and stream derivation.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded random generator with derivable substreams.
///
/// stream(k0, k1, k2) yields a generator whose output depends only on the
/// base seed and the keys, so work split across (column, block, iteration)
/// tasks reproduces the same numbers regardless of scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_(seed) {
    std::uint64_t s = seed;
    engine_.seed(splitmix64_next(s));
  }

  Rng stream(std::uint64_t k0, std::uint64_t k1 = 0, std::uint64_t k2 = 0) const {
    std::uint64_t s = base_;
    std::uint64_t h = splitmix64_next(s);
    s ^= k0;
    h ^= splitmix64_next(s);
    s ^= k1;
    h ^= splitmix64_next(s);
    s ^= k2;
    h ^= splitmix64_next(s);
    return Rng(h);
  }

  std::uint64_t base_seed() const { return base_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on (0,1), both endpoints excluded.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [lo, hi], inclusive; rejection keeps it unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  bool coin() { return (engine_() & 1) != 0; }

 private:
  std::uint64_t base_;
  std::mt19937_64 engine_;
};

}  // namespace depdag
