#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "prophet/core.hpp"

namespace prophet {

struct ConvergenceStats {
  // Share of the decode (in steps) elapsed when the region's top-1 first
  // equals the answer, counting the matching step itself.
  double first_match_fraction = 0.0;
  // Same, for the step from which the region's top-1 never changes again.
  double stable_from_fraction = 0.0;
  bool matched = false;
  int first_match_t = 0;
  int stable_from_t = 0;
};

// Region tokens of the final output, read back from a trace: each
// position takes its top-1 at the step it was unmasked. Throws MissingTop1.
std::vector<TokenId> decoded_region_tokens(const DecodeTrace& trace, AnswerRegion region);

// Fractions use the executed step count for full decodes and t_max for
// committed traces. Throws MissingTop1, InvalidInput (answer length) and
// NotApplicable (final output lacks the answer).
ConvergenceStats first_match_step(const DecodeTrace& trace, const std::vector<TokenId>& answer,
                                  AnswerRegion region);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

struct ConvergenceHistogram {
  // Bin k covers (k/B, (k+1)/B].
  std::vector<HistogramBin> bins;
  std::size_t total = 0;
  std::size_t le_50 = 0;
  std::size_t le_70 = 0;
  double frac_le_50 = 0.0;
  double frac_le_70 = 0.0;
};

// Throws EmptyInput, InvalidInput (value outside (0,1] or zero bins).
ConvergenceHistogram convergence_histogram(const std::vector<double>& fractions,
                                           std::size_t bin_count);

enum class DynamicsClass : char { unchanged = 'U', changed = 'C', decoded = 'D' };

struct DynamicsMatrix {
  std::size_t n_positions = 0;
  std::vector<int> steps;  // t of each recorded step, in trace order
  std::vector<DynamicsClass> cells;  // position-major

  DynamicsClass at(std::size_t position, std::size_t step_index) const {
    return cells[position * steps.size() + step_index];
  }
  std::size_t count(DynamicsClass c) const;
};

// Throws MissingTop1.
DynamicsMatrix dynamics_matrix(const DecodeTrace& trace);

// Throws InvalidInput when used_steps is 0.
double speedup(int full_steps, int used_steps);
// "2.34×"
std::string format_speedup(double value);
// "54.0 (2.34×)"
std::string table_cell(double accuracy_percent, double speedup_value);

struct Agreement {
  bool exact = false;
  double token_match_fraction = 0.0;
};

// Throws InvalidInput on length mismatch or a region outside the sequences.
Agreement agreement(const TokenSequence& full_out, const TokenSequence& prophet_out,
                    AnswerRegion region);

}  // namespace prophet
