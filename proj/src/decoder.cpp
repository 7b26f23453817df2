#include "prophet/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "prophet/confidence.hpp"
#include "prophet/error.hpp"
#include "prophet/forward.hpp"
#include "prophet/kernels.hpp"

namespace prophet {

BlockSchedule::Slot BlockSchedule::at_step(int t) const {
  const int total = total_steps();
  if (t < 1 || t > total) throw Error(ErrorKind::InvalidInput, "step outside schedule");
  auto k = static_cast<std::size_t>(total - t);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto steps = static_cast<std::size_t>(steps_per_block[b]);
    if (k < steps) return {b, k, unmask_counts[b][k], k + 1 == steps};
    k -= steps;
  }
  throw Error(ErrorKind::InvalidInput, "step outside schedule");
}

int BlockSchedule::total_steps() const {
  return std::accumulate(steps_per_block.begin(), steps_per_block.end(), 0);
}

BlockSchedule build_schedule(std::size_t gen_len, std::size_t block_len, int t_max,
                             std::size_t gen_begin) {
  if (gen_len == 0) throw Error(ErrorKind::InvalidConfig, "gen_len");
  if (block_len == 0 || gen_len % block_len != 0) throw Error(ErrorKind::InvalidConfig, "block_len");
  const std::size_t n_blocks = gen_len / block_len;
  if (t_max < 1 || static_cast<std::size_t>(t_max) < n_blocks) {
    throw Error(ErrorKind::InvalidConfig, "t_max");
  }

  BlockSchedule s;
  const auto steps = static_cast<std::size_t>(t_max);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t start = gen_begin + b * block_len;
    s.blocks.push_back({start, start + block_len});
    const std::size_t block_steps = steps / n_blocks + (b < steps % n_blocks ? 1 : 0);
    s.steps_per_block.push_back(static_cast<int>(block_steps));

    std::vector<std::size_t> counts(block_steps);
    for (std::size_t j = 0; j < block_steps; ++j) {
      counts[j] = block_len / block_steps + (j < block_len % block_steps ? 1 : 0);
    }
    s.unmask_counts.push_back(std::move(counts));
  }
  return s;
}

std::vector<std::size_t> remask_random(const std::vector<std::size_t>& masked_in_block, std::size_t k,
                                       Rng& rng) {
  if (k > masked_in_block.size()) {
    throw Error(ErrorKind::InvalidUnmaskCount, "k=" + std::to_string(k) + " exceeds " +
                                                   std::to_string(masked_in_block.size()) + " masked");
  }
  std::vector<std::size_t> pool = masked_in_block;
  for (std::size_t j = 0; j < k; ++j) {
    const auto pick = j + static_cast<std::size_t>(rng.below(pool.size() - j));
    std::swap(pool[j], pool[pick]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::size_t> remask_low_confidence(const LogitMatrix& logits,
                                               const std::vector<std::size_t>& masked_in_block,
                                               std::size_t k) {
  if (k > masked_in_block.size()) {
    throw Error(ErrorKind::InvalidUnmaskCount, "k=" + std::to_string(k) + " exceeds " +
                                                   std::to_string(masked_in_block.size()) + " masked");
  }
  struct Scored {
    double confidence;
    std::size_t pos;
  };
  std::vector<Scored> scored;
  scored.reserve(masked_in_block.size());
  for (std::size_t pos : masked_in_block) scored.push_back({kernels::top_prob_row(logits.row(pos)), pos});
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.pos < b.pos;
  });
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) out.push_back(scored[j].pos);
  std::sort(out.begin(), out.end());
  return out;
}

namespace decode_detail {

void check_inputs(const DenoiserModel& model, const TokenSequence& seq0, const DecodeConfig& cfg) {
  validate_config(cfg);
  if (seq0.gen_len != cfg.gen_len) throw Error(ErrorKind::InvalidConfig, "gen_len");
  check_sequence(seq0, model.vocab());
  if (model.vocab().size() < 2) throw Error(ErrorKind::DegenerateVocabulary, "vocabulary has one id");
}

std::vector<TokenId> top1_snapshot(const TokenSequence& seq, const LogitMatrix& logits) {
  std::vector<TokenId> top1 = kernels::argmax_rows(logits);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!seq.is_masked(i)) top1[i] = seq.tokens[i];
  }
  return top1;
}

void record_fills(StepRecord& rec, const TokenSequence& seq) {
  if (!rec.top1) return;
  for (std::size_t pos : rec.unmasked_positions) (*rec.top1)[pos] = seq.tokens[pos];
}

namespace {

TokenId draw_token(std::span<const double> row, TokenId mask_id, double temperature, Rng& rng) {
  if (temperature == 0.0) return kernels::argmax_row(row);
  const auto mask = static_cast<std::size_t>(mask_id);
  double top = -INFINITY;
  for (std::size_t v = 0; v < row.size(); ++v) {
    if (v != mask) top = std::max(top, row[v]);
  }
  std::vector<double> probs(row.size(), 0.0);
  double denom = 0.0;
  for (std::size_t v = 0; v < row.size(); ++v) {
    if (v == mask) continue;
    probs[v] = std::exp((row[v] - top) / temperature);
    denom += probs[v];
  }
  for (double& p : probs) p /= denom;
  return sample_categorical(probs, rng.uniform());
}

}  // namespace

std::vector<std::size_t> refine_step(TokenSequence& seq, const LogitMatrix& logits,
                                     const BlockSchedule& schedule, int t, const DecodeConfig& cfg,
                                     Rng& rng) {
  const auto slot = schedule.at_step(t);
  const Block& block = schedule.blocks[slot.block];
  std::vector<std::size_t> masked;
  for (std::size_t i = block.start; i < block.end; ++i) {
    if (seq.is_masked(i)) masked.push_back(i);
  }
  // The last step of a block always drains it.
  const std::size_t k = slot.last_in_block ? masked.size() : std::min(slot.count, masked.size());

  std::vector<std::size_t> chosen = cfg.remask_strategy == RemaskStrategy::random
                                        ? remask_random(masked, k, rng)
                                        : remask_low_confidence(logits, masked, k);
  for (std::size_t pos : chosen) {
    seq.tokens[pos] = draw_token(logits.row(pos), seq.mask_id, cfg.temperature, rng);
  }
  return chosen;
}

}  // namespace decode_detail

DecodeResult decode_full(const DenoiserModel& model, const TokenSequence& seq0, const DecodeConfig& cfg,
                         Rng& rng) {
  decode_detail::check_inputs(model, seq0, cfg);
  const AnswerRegion region = resolve_answer_region(cfg, seq0);
  const BlockSchedule schedule = build_schedule(cfg.gen_len, cfg.block_len, cfg.t_max, seq0.gen_begin());

  DecodeResult result{seq0, {}};
  TokenSequence& seq = result.sequence;
  DecodeTrace& trace = result.trace;
  trace.t_max = cfg.t_max;
  trace.steps.reserve(static_cast<std::size_t>(cfg.t_max));

  for (int t = cfg.t_max; t >= 1; --t) {
    const LogitMatrix logits = model.predict_logits(seq, t);
    ++trace.model_calls;

    StepRecord rec;
    rec.t = t;
    rec.progress = progress_at(cfg.t_max, t);
    rec.mean_gap = mean_gap(logits, region, seq);
    if (cfg.record_top1) rec.top1 = decode_detail::top1_snapshot(seq, logits);
    rec.unmasked_positions = decode_detail::refine_step(seq, logits, schedule, t, cfg, rng);
    decode_detail::record_fills(rec, seq);
    trace.steps.push_back(std::move(rec));
  }
  return result;
}

DecodeResult decode_full(const DenoiserModel& model, const TokenSequence& seq0, const DecodeConfig& cfg) {
  Rng rng(cfg.seed);
  return decode_full(model, seq0, cfg, rng);
}

}  // namespace prophet
