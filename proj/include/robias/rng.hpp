#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace robias {

// Seeded pseudo-random stream. Sub-streams are derived by hashing the parent
// seed with a list of integer keys, so a sub-stream depends only on
// (seed, keys) and never on how much of the parent has been consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  // Independent stream keyed by `keys`; pure function of (seed(), keys).
  Rng substream(std::initializer_list<std::uint64_t> keys) const;

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();
  // Uniform in [lo, hi]; returns lo when lo == hi.
  double uniform(double lo, double hi);
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Mixes a seed and keys into a new 64-bit seed (SplitMix64 finalizer chain).
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> keys);

// Stable key for string labels used when deriving sub-streams.
std::uint64_t key_of(const char* label);

}  // namespace robias
