#pragma once

#include <array>
#include <cstdint>

namespace qprl::math {

/// Deterministic xoshiro256++ generator. Same seed gives a bit-identical
/// stream of integers on every platform; floating-point draws are derived
/// only from that stream and our own inverse-CDF code, never from
/// platform-dependent library generators.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform draw strictly inside (0, 1).
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal draw via the inverse CDF of `uniform()`.
  double normal();
  double normal(double mu, double sigma);

  std::uint64_t seed() const { return seed_; }

  /// Derives an independent generator for a named substream (per seed,
  /// per worker, per purpose).
  Rng spawn(std::uint64_t stream) const;

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_;
};

}  // namespace qprl::math
