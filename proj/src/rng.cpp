#include "shapelab/rng.hpp"

namespace shapelab {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Two-word mix used for stream derivation.
std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL);
  std::uint64_t s = x;
  return splitmix64(s);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& w : s_) w = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
  if (range == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit span
  std::uint64_t mask = ~0ULL;
  if ((range & (range - 1)) == 0) {
    return lo + static_cast<std::int64_t>(next_u64() & (range - 1));
  }
  int bits = 64;
  while (bits > 1 && (range - 1) >> (bits - 1) == 0) --bits;
  mask = (bits == 64) ? ~0ULL : ((1ULL << bits) - 1);
  for (;;) {
    const std::uint64_t v = next_u64() & mask;
    if (v < range) return lo + static_cast<std::int64_t>(v);
  }
}

Rng Rng::derive(std::uint64_t tag) const { return Rng(mix64(seed_, tag)); }

std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) { return mix64(a, b); }

double hash_unit(std::uint64_t h) {
  std::uint64_t x = h;
  return static_cast<double>(splitmix64(x) >> 11) * 0x1.0p-53;
}

}  // namespace shapelab
