#pragma once

#include <cstdint>
#include <random>

namespace idflow {

// Deterministic RNG used everywhere (init, data generation, augmentation).
// Draws raw mt19937_64 words and maps them ourselves so that sequences are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive on both ends.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  uint64_t seed() const { return seed_; }

  // Derived stream with a decorrelated seed (splitmix64 of seed and stream id).
  Rng fork(uint64_t stream) const {
    uint64_t z = seed_ + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return Rng(z ^ (z >> 31));
  }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace idflow
