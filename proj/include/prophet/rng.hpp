#pragma once

#include <cstdint>
#include <random>

namespace prophet {

/**
 * Seeded random stream with platform-independent draws.
 *
 * std::mt19937_64 output is fixed by the standard, but the standard
 * distributions are not, so the conversions to [0,1) and to bounded
 * integers are done here. This keeps traces bit-reproducible across
 * standard libraries.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for the index-th sequence of a batch.
  static Rng stream(std::uint64_t seed, std::uint64_t index) { return Rng(seed ^ index); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound); bound must be > 0. Rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace prophet
