#pragma once

#include <cstdint>
#include <vector>

namespace shapelab {

// Deterministic PRNG: xoshiro256** seeded through splitmix64.
// Identical seeds give identical streams on every platform.
//
// Streams for distinct purposes (weight init, dropout, shuffling, ...)
// are split off with derive(), which keys a child generator on the
// construction seed and a stream tag rather than on consumption state.
// Drawing more numbers from one stream therefore never perturbs another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [lo, hi], inclusive. Rejection sampled, no modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Independent child stream keyed on (construction seed, tag).
  Rng derive(std::uint64_t tag) const;

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

// Stateless mixing hash (same mixer derive() uses) and a map to [0, 1).
// Used where a value must depend only on coordinates, not on draw order.
std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b);
double hash_unit(std::uint64_t h);

// Stream tags used across the library. Values are arbitrary but fixed.
namespace rng_stream {
inline constexpr std::uint64_t kWeights = 0x01;
inline constexpr std::uint64_t kShuffle = 0x02;
inline constexpr std::uint64_t kDropout = 0x03;
inline constexpr std::uint64_t kData = 0x04;
inline constexpr std::uint64_t kTrials = 0x05;
inline constexpr std::uint64_t kTies = 0x06;
inline constexpr std::uint64_t kTexture = 0x07;
inline constexpr std::uint64_t kJitter = 0x08;
inline constexpr std::uint64_t kSession = 0x09;
}  // namespace rng_stream

}  // namespace shapelab
