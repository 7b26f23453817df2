#include "prophet/confidence.hpp"

#include <cmath>
#include <vector>

#include "prophet/error.hpp"
#include "prophet/kernels.hpp"

namespace prophet {

double confidence_gap(std::span<const double> row) { return kernels::top2_gap_row(row); }

double mean_gap(const LogitMatrix& logits, AnswerRegion region, std::span<const std::size_t> masked) {
  std::vector<std::size_t> rows;
  for (std::size_t pos : masked) {
    if (region.contains(pos)) rows.push_back(pos);
  }
  if (rows.empty()) return kInfiniteGap;

  // Gaps are independent per row; the sum runs in ascending position order
  // so the result does not depend on the thread count.
  std::vector<double> gaps(rows.size());
  const auto n = static_cast<long long>(rows.size());
  const bool wide = rows.size() * logits.vocab_size() >= kernels::kParallelCells;
#pragma omp parallel for schedule(static) if (wide)
  for (long long k = 0; k < n; ++k) {
    gaps[static_cast<std::size_t>(k)] = confidence_gap(logits.row(rows[static_cast<std::size_t>(k)]));
  }
  double sum = 0.0;
  for (double g : gaps) sum += g;
  return sum / static_cast<double>(gaps.size());
}

double mean_gap(const LogitMatrix& logits, AnswerRegion region, const TokenSequence& seq) {
  const auto masked = masked_positions(seq);
  return mean_gap(logits, region, masked);
}

ThresholdParams ThresholdParams::from(const DecodeConfig& cfg) {
  return {cfg.tau_high, cfg.tau_mid, cfg.tau_low, cfg.p1, cfg.p2};
}

void ThresholdParams::validate() const {
  if (std::isnan(tau_high) || std::isnan(tau_mid) || std::isnan(tau_low)) {
    throw Error(ErrorKind::InvalidConfig, "tau");
  }
  if (!(tau_high >= tau_mid && tau_mid >= tau_low)) throw Error(ErrorKind::InvalidConfig, "tau ordering");
  if (!(tau_low >= 0.0)) throw Error(ErrorKind::InvalidConfig, "tau_low");
  if (!(p1 > 0.0 && p1 < p2 && p2 < 1.0)) throw Error(ErrorKind::InvalidConfig, "breakpoints");
}

double threshold(double progress, const ThresholdParams& params) {
  if (progress < params.p1) return params.tau_high;
  if (progress < params.p2) return params.tau_mid;
  return params.tau_low;
}

CommitDecision should_commit(double mean_gap, double progress, const ThresholdParams& params) {
  CommitDecision d;
  d.mean_gap = mean_gap;
  d.progress = progress;
  d.threshold = threshold(progress, params);
  d.committed = !std::isinf(d.threshold) && mean_gap >= d.threshold;
  return d;
}

}  // namespace prophet
