#pragma once

#include <cstddef>
#include <vector>

#include "prophet/core.hpp"
#include "prophet/logits.hpp"
#include "prophet/models.hpp"
#include "prophet/rng.hpp"

namespace prophet {

struct Block {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Block&, const Block&) = default;
};

// Semi-autoregressive schedule. Steps are split evenly across blocks and
// each block's positions evenly across its steps; remainders go to the
// earliest blocks and steps.
struct BlockSchedule {
  std::vector<Block> blocks;
  std::vector<int> steps_per_block;
  // unmask_counts[b][j]: positions to unmask at the j-th step of block b.
  std::vector<std::vector<std::size_t>> unmask_counts;

  struct Slot {
    std::size_t block = 0;
    std::size_t local_step = 0;
    std::size_t count = 0;
    bool last_in_block = false;
  };
  // Slot for step counter t in a t_max-step decode (t runs t_max..1).
  Slot at_step(int t) const;
  int total_steps() const;
};

// Throws InvalidConfig when block_len does not divide gen_len or t_max is
// smaller than the block count.
BlockSchedule build_schedule(std::size_t gen_len, std::size_t block_len, int t_max,
                             std::size_t gen_begin = 0);

// Uniform k-subset (partial Fisher-Yates), returned ascending.
std::vector<std::size_t> remask_random(const std::vector<std::size_t>& masked_in_block,
                                       std::size_t k, Rng& rng);

// The k most confident positions; confidence is the softmax probability of
// the row argmax. Ties go to the lower position. Returned ascending.
std::vector<std::size_t> remask_low_confidence(const LogitMatrix& logits,
                                               const std::vector<std::size_t>& masked_in_block,
                                               std::size_t k);

struct DecodeResult {
  TokenSequence sequence;
  DecodeTrace trace;
};

// Baseline reverse loop over the full step budget. Never commits early.
DecodeResult decode_full(const DenoiserModel& model, const TokenSequence& seq0,
                         const DecodeConfig& cfg, Rng& rng);
// Uses Rng(cfg.seed).
DecodeResult decode_full(const DenoiserModel& model, const TokenSequence& seq0,
                         const DecodeConfig& cfg);

// Pieces shared with the early-commit loop.
namespace decode_detail {

// Validates config, sequence and model against each other.
void check_inputs(const DenoiserModel& model, const TokenSequence& seq0, const DecodeConfig& cfg);

// Current token at unmasked positions, row argmax at masked ones.
std::vector<TokenId> top1_snapshot(const TokenSequence& seq, const LogitMatrix& logits);

// After a step, positions filled in it record the token actually written.
// Under greedy decoding this is the argmax already in the snapshot; under
// sampling it keeps "decoded" the last event for the position.
void record_fills(StepRecord& rec, const TokenSequence& seq);

// Prediction + remasking for step t: selects positions in the current block
// and fills them. Returns the unmasked positions, ascending.
std::vector<std::size_t> refine_step(TokenSequence& seq, const LogitMatrix& logits,
                                     const BlockSchedule& schedule, int t,
                                     const DecodeConfig& cfg, Rng& rng);

}  // namespace decode_detail

}  // namespace prophet
