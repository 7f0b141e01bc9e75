#include "robias/rng.hpp"

#include <stdexcept>

namespace robias {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) {
    h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  }
  return h;
}

std::uint64_t key_of(const char* label) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* p = label; *p != '\0'; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::substream(std::initializer_list<std::uint64_t> keys) const {
  return Rng(derive_seed(seed_, keys));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (lo == hi) return lo;
  const double v = lo + (hi - lo) * uniform01();
  return v > hi ? hi : v;
}

std::uint64_t Rng::index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index: n must be positive");
  // Rejection sampling keeps the draw unbiased and platform independent.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

}  // namespace robias
