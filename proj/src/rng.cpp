#include "prophet/rng.hpp"

#include <limits>

namespace prophet {

std::uint64_t Rng::below(std::uint64_t bound) {
  // Reject the top partial bucket so every residue is equally likely.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

}  // namespace prophet
