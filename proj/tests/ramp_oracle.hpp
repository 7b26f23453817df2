#pragma once

// Closed-form commit step for a ramp oracle decoded as one block whose
// answer region is the whole generation region. Written independently of the
// library: it walks the step counter and tracks how many positions the even
// split has already filled.

#include <cstddef>

namespace testing {

struct RampPrediction {
  int commit_t = 0;  // 0 when the decode runs to the end
  int steps_used = 0;
};

inline double stage_threshold(double p) {
  if (p < 0.33) return 8.0;
  if (p < 0.67) return 5.0;
  return 3.0;
}

inline RampPrediction predict_ramp(int t_max, int t_star, double pre_gap, double post_gap, std::size_t gen_len) {
  std::size_t filled = 0;
  for (int t = t_max; t >= 1; --t) {
    const int done = t_max - t;
    const double p = static_cast<double>(done) / t_max;
    const bool any_masked = filled < gen_len;
    const double gap = t <= t_star ? post_gap : pre_gap;
    if (!any_masked || gap >= stage_threshold(p)) return {t, done + 1};
    // Steps remaining including this one share the remaining positions, larger shares first.
    const auto remaining_steps = static_cast<std::size_t>(t);
    filled += (gen_len - filled + remaining_steps - 1) / remaining_steps;
  }
  return {0, t_max};
}

// Step counter at which a ramp stabilises after fraction f of the budget.
inline int t_star_for_fraction(int t_max, double f) {
  return t_max - static_cast<int>(f * t_max + 0.5);
}

}  // namespace testing
