#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prophet/core.hpp"
#include "prophet/logits.hpp"

namespace prophet {

// Top-1 logit minus top-2 logit. Throws DegenerateVocabulary for rows
// shorter than 2.
double confidence_gap(std::span<const double> row);

// Mean gap over the region positions listed in `masked` (ascending).
// Returns kInfiniteGap when none of them lies in the region.
double mean_gap(const LogitMatrix& logits, AnswerRegion region,
                std::span<const std::size_t> masked);
double mean_gap(const LogitMatrix& logits, AnswerRegion region, const TokenSequence& seq);

struct ThresholdParams {
  double tau_high = 8.0;
  double tau_mid = 5.0;
  double tau_low = 3.0;
  double p1 = 0.33;
  double p2 = 0.67;

  static ThresholdParams from(const DecodeConfig& cfg);
  // Throws InvalidConfig naming the violated field.
  void validate() const;
};

// Staged threshold: tau_high below p1, tau_mid in [p1, p2), tau_low from p2.
double threshold(double progress, const ThresholdParams& params);

struct CommitDecision {
  bool committed = false;
  int step = 0;
  double mean_gap = 0.0;
  double threshold = 0.0;
  double progress = 0.0;
};

// committed = mean_gap >= threshold(progress). An infinite threshold never
// commits, so it reproduces the baseline decoder exactly.
CommitDecision should_commit(double mean_gap, double progress, const ThresholdParams& params);

}  // namespace prophet
