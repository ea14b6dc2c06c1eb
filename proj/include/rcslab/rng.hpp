#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rcslab {

/// One step of the splitmix64 sequence; also used as a seed scrambler.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent child seed from (seed, stream index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x2545f4914f6cdd1dULL * (stream + 1));
  return splitmix64(s);
}

/// FNV-1a over a byte string, used for stable command/content hashing.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Seedable, splittable generator. Child streams depend only on the original
/// seed and the stream index, never on draw history, so parallel consumers
/// get schedule-independent results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent generator for the given stream index.
  Rng stream(std::uint64_t index) const { return Rng(mix_seed(seed_, index)); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection-free modulo is fine here; bound is tiny in every use.
    return engine_() % bound;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace rcslab
