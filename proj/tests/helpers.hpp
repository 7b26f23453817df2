#pragma once

#include <cstdint>
#include <vector>

#include "prophet/core.hpp"
#include "prophet/logits.hpp"
#include "prophet/models.hpp"
#include "prophet/rng.hpp"

namespace testing {

using namespace prophet;

// Random logits with values on a coarse grid, so ties actually happen.
inline LogitMatrix random_logits(std::size_t n, const Vocabulary& v, Rng& rng, int grid = 8) {
  LogitMatrix m(n, v.size(), v.mask_id());
  for (std::size_t i = 0; i < n; ++i) {
    for (TokenId c : v.content_tokens()) {
      m.set(i, c, static_cast<double>(rng.below(static_cast<std::uint64_t>(grid))) * 0.75);
    }
  }
  return m;
}

inline ScriptedOracle random_oracle(std::size_t n, const Vocabulary& v, int t_max, Rng& rng) {
  std::vector<LogitMatrix> schedule;
  for (int t = 1; t <= t_max; ++t) schedule.push_back(random_logits(n, v, rng));
  return ScriptedOracle(v, std::move(schedule));
}

inline std::vector<TokenId> random_prompt(std::size_t len, const Vocabulary& v, Rng& rng) {
  const auto content = v.content_tokens();
  std::vector<TokenId> p(len);
  for (auto& x : p) x = content[rng.below(content.size())];
  return p;
}

// A random valid (gen_len, block_len, t_max) triple.
struct Shape {
  std::size_t gen_len;
  std::size_t block_len;
  int t_max;
};

inline Shape random_shape(Rng& rng, std::size_t max_gen = 32, int max_t = 50) {
  Shape s{};
  s.gen_len = 1 + rng.below(max_gen);
  std::vector<std::size_t> divisors;
  for (std::size_t d = 1; d <= s.gen_len; ++d) {
    if (s.gen_len % d == 0) divisors.push_back(d);
  }
  s.block_len = divisors[rng.below(divisors.size())];
  const int blocks = static_cast<int>(s.gen_len / s.block_len);
  s.t_max = blocks + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_t - blocks + 1)));
  return s;
}

}  // namespace testing
