#pragma once

#include "prophet/confidence.hpp"
#include "prophet/core.hpp"
#include "prophet/decoder.hpp"
#include "prophet/logits.hpp"
#include "prophet/models.hpp"
#include "prophet/rng.hpp"

namespace prophet {

// Fills every masked position with its row argmax in one pass.
TokenSequence commit(const TokenSequence& seq, const LogitMatrix& logits);

struct ProphetResult {
  TokenSequence sequence;
  DecodeTrace trace;
  // Decision of the last executed step.
  CommitDecision decision;
};

/**
 * Early-commit decoding loop.
 *
 * Each step predicts logits, then checks the mean confidence gap over the
 * still-masked answer positions against the progress-dependent threshold.
 * On success every remaining mask is filled from the same logits and the
 * loop stops; otherwise the step proceeds exactly like decode_full.
 *
 * Requires cfg.prophet_enabled.
 */
ProphetResult decode_prophet(const DenoiserModel& model, const TokenSequence& seq0,
                             const DecodeConfig& cfg, Rng& rng);
ProphetResult decode_prophet(const DenoiserModel& model, const TokenSequence& seq0,
                             const DecodeConfig& cfg);

}  // namespace prophet
