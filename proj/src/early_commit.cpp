#include "prophet/early_commit.hpp"

#include "prophet/error.hpp"
#include "prophet/kernels.hpp"

namespace prophet {

TokenSequence commit(const TokenSequence& seq, const LogitMatrix& logits) {
  if (logits.n_positions() != seq.size()) {
    throw Error(ErrorKind::ModelMismatch, "logit rows do not match sequence length");
  }
  TokenSequence out = seq;
  const std::vector<TokenId> best = kernels::argmax_rows(logits);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.is_masked(i)) out.tokens[i] = best[i];
  }
  return out;
}

ProphetResult decode_prophet(const DenoiserModel& model, const TokenSequence& seq0,
                             const DecodeConfig& cfg, Rng& rng) {
  if (!cfg.prophet_enabled) throw Error(ErrorKind::InvalidConfig, "prophet_enabled");
  decode_detail::check_inputs(model, seq0, cfg);
  const ThresholdParams params = ThresholdParams::from(cfg);
  const AnswerRegion region = resolve_answer_region(cfg, seq0);
  const BlockSchedule schedule = build_schedule(cfg.gen_len, cfg.block_len, cfg.t_max, seq0.gen_begin());

  ProphetResult result{seq0, {}, {}};
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

    result.decision = should_commit(rec.mean_gap, rec.progress, params);
    result.decision.step = t;
    if (result.decision.committed) {
      rec.unmasked_positions = masked_positions(seq);
      rec.committed = true;
      seq = commit(seq, logits);
      trace.commit_step = t;
      trace.steps.push_back(std::move(rec));
      break;
    }

    rec.unmasked_positions = decode_detail::refine_step(seq, logits, schedule, t, cfg, rng);
    decode_detail::record_fills(rec, seq);
    trace.steps.push_back(std::move(rec));
  }
  return result;
}

ProphetResult decode_prophet(const DenoiserModel& model, const TokenSequence& seq0,
                             const DecodeConfig& cfg) {
  Rng rng(cfg.seed);
  return decode_prophet(model, seq0, cfg, rng);
}

}  // namespace prophet
