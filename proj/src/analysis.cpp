#include "prophet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "prophet/error.hpp"

namespace prophet {

namespace {

void require_top1(const DecodeTrace& trace) {
  if (trace.steps.empty()) throw Error(ErrorKind::MissingTop1, "trace has no steps");
  const std::size_t n = trace.steps.front().top1 ? trace.steps.front().top1->size() : 0;
  for (const auto& s : trace.steps) {
    if (!s.top1) throw Error(ErrorKind::MissingTop1, "step t=" + std::to_string(s.t) + " has no top1");
    if (s.top1->size() != n) throw Error(ErrorKind::InvalidInput, "top1 rows differ in length");
  }
}

std::vector<TokenId> region_of(const std::vector<TokenId>& row, AnswerRegion region) {
  return {row.begin() + static_cast<std::ptrdiff_t>(region.start),
          row.begin() + static_cast<std::ptrdiff_t>(region.end)};
}

int trace_t_max(const DecodeTrace& trace) {
  return trace.t_max > 0 ? trace.t_max : trace.steps.front().t;
}

}  // namespace

std::vector<TokenId> decoded_region_tokens(const DecodeTrace& trace, AnswerRegion region) {
  require_top1(trace);
  const auto& last = *trace.steps.back().top1;
  if (region.start >= region.end || region.end > last.size()) {
    throw Error(ErrorKind::InvalidInput, "region outside traced positions");
  }
  std::vector<TokenId> out = region_of(last, region);
  for (const auto& s : trace.steps) {
    for (std::size_t pos : s.unmasked_positions) {
      if (region.contains(pos)) out[pos - region.start] = (*s.top1)[pos];
    }
  }
  return out;
}

ConvergenceStats first_match_step(const DecodeTrace& trace, const std::vector<TokenId>& answer,
                                  AnswerRegion region) {
  require_top1(trace);
  if (answer.size() != region.size()) throw Error(ErrorKind::InvalidInput, "answer length != region length");
  if (decoded_region_tokens(trace, region) != answer) {
    throw Error(ErrorKind::NotApplicable, "final output does not contain the answer");
  }

  const int t_max = trace_t_max(trace);
  const double denom = trace.commit_step ? static_cast<double>(t_max)
                                         : static_cast<double>(trace.steps.size());
  auto fraction = [&](int t) { return static_cast<double>(t_max - t + 1) / denom; };

  ConvergenceStats stats;
  stats.matched = true;
  const auto first = std::find_if(trace.steps.begin(), trace.steps.end(), [&](const StepRecord& s) {
    return region_of(*s.top1, region) == answer;
  });
  if (first == trace.steps.end()) {
    throw Error(ErrorKind::NotApplicable, "top-1 never matches the answer");
  }
  stats.first_match_t = first->t;

  std::size_t stable = trace.steps.size() - 1;
  const auto final_row = region_of(*trace.steps.back().top1, region);
  while (stable > 0 && region_of(*trace.steps[stable - 1].top1, region) == final_row) --stable;
  stats.stable_from_t = trace.steps[stable].t;

  stats.first_match_fraction = fraction(stats.first_match_t);
  stats.stable_from_fraction = fraction(stats.stable_from_t);
  return stats;
}

ConvergenceHistogram convergence_histogram(const std::vector<double>& fractions, std::size_t bin_count) {
  if (fractions.empty()) throw Error(ErrorKind::EmptyInput, "no fractions");
  if (bin_count == 0) throw Error(ErrorKind::InvalidInput, "bin_count must be positive");

  ConvergenceHistogram h;
  const auto bins = static_cast<double>(bin_count);
  for (std::size_t k = 0; k < bin_count; ++k) {
    h.bins.push_back({static_cast<double>(k) / bins, static_cast<double>(k + 1) / bins, 0});
  }
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorKind::InvalidInput, "fraction outside (0, 1]");
    auto k = static_cast<std::size_t>(std::ceil(f * bins)) - 1;
    k = std::min(k, bin_count - 1);
    // Guard against f * bins rounding across a bin edge.
    while (k > 0 && f <= h.bins[k].lo) --k;
    while (k + 1 < bin_count && f > h.bins[k].hi) ++k;
    ++h.bins[k].count;
    if (f <= 0.5) ++h.le_50;
    if (f <= 0.7) ++h.le_70;
  }
  h.total = fractions.size();
  h.frac_le_50 = static_cast<double>(h.le_50) / static_cast<double>(h.total);
  h.frac_le_70 = static_cast<double>(h.le_70) / static_cast<double>(h.total);
  return h;
}

std::size_t DynamicsMatrix::count(DynamicsClass c) const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), c));
}

DynamicsMatrix dynamics_matrix(const DecodeTrace& trace) {
  require_top1(trace);
  DynamicsMatrix m;
  m.n_positions = trace.steps.front().top1->size();
  const std::size_t n_steps = trace.steps.size();
  for (const auto& s : trace.steps) m.steps.push_back(s.t);
  m.cells.assign(m.n_positions * n_steps, DynamicsClass::unchanged);

  for (std::size_t k = 0; k < n_steps; ++k) {
    const auto& row = *trace.steps[k].top1;
    if (k > 0) {
      const auto& prev = *trace.steps[k - 1].top1;
      for (std::size_t i = 0; i < m.n_positions; ++i) {
        if (row[i] != prev[i]) m.cells[i * n_steps + k] = DynamicsClass::changed;
      }
    }
    for (std::size_t pos : trace.steps[k].unmasked_positions) {
      if (pos >= m.n_positions) throw Error(ErrorKind::InvalidInput, "unmasked position outside top1 row");
      m.cells[pos * n_steps + k] = DynamicsClass::decoded;
    }
  }
  return m;
}

double speedup(int full_steps, int used_steps) {
  if (used_steps <= 0) throw Error(ErrorKind::InvalidInput, "used_steps must be >= 1");
  return static_cast<double>(full_steps) / static_cast<double>(used_steps);
}

std::string format_speedup(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f×", value);
  return buf;
}

std::string table_cell(double accuracy_percent, double speedup_value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f (", accuracy_percent);
  return buf + format_speedup(speedup_value) + ")";
}

Agreement agreement(const TokenSequence& full_out, const TokenSequence& prophet_out, AnswerRegion region) {
  if (full_out.size() != prophet_out.size()) throw Error(ErrorKind::InvalidInput, "sequence lengths differ");
  if (region.start >= region.end || region.end > full_out.size()) {
    throw Error(ErrorKind::InvalidInput, "region outside sequences");
  }
  std::size_t same = 0;
  for (std::size_t i = region.start; i < region.end; ++i) {
    if (full_out.tokens[i] == prophet_out.tokens[i]) ++same;
  }
  Agreement a;
  a.exact = same == region.size();
  a.token_match_fraction = static_cast<double>(same) / static_cast<double>(region.size());
  return a;
}

}  // namespace prophet
