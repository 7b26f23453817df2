#include "prophet/core.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "prophet/error.hpp"

namespace prophet {

Vocabulary::Vocabulary(std::size_t size, TokenId mask_id, std::vector<std::string> token_names)
    : size_(size), mask_id_(mask_id), token_names_(std::move(token_names)) {
  if (size_ == 0) throw Error(ErrorKind::InvalidInput, "vocabulary size must be positive");
  if (!contains(mask_id_)) throw Error(ErrorKind::InvalidInput, "mask_id must be < vocabulary size");
  if (!token_names_.empty()) {
    if (token_names_.size() != size_) {
      throw Error(ErrorKind::InvalidInput, "token_names must have one entry per id");
    }
    std::set<std::string> seen(token_names_.begin(), token_names_.end());
    if (seen.size() != token_names_.size()) {
      throw Error(ErrorKind::InvalidInput, "token_names must be unique");
    }
  }
}

std::string Vocabulary::name(TokenId id) const {
  if (has_names() && contains(id)) return token_names_[static_cast<std::size_t>(id)];
  return std::to_string(id);
}

std::vector<TokenId> Vocabulary::content_tokens() const {
  std::vector<TokenId> out;
  out.reserve(size_ - 1);
  for (std::size_t v = 0; v < size_; ++v) {
    if (static_cast<TokenId>(v) != mask_id_) out.push_back(static_cast<TokenId>(v));
  }
  return out;
}

TokenSequence new_sequence(const std::vector<TokenId>& prompt, std::size_t gen_len,
                           const Vocabulary& vocab) {
  if (gen_len == 0) throw Error(ErrorKind::InvalidConfig, "gen_len");
  for (TokenId id : prompt) {
    if (id == vocab.mask_id()) throw Error(ErrorKind::InvalidPrompt, "prompt contains mask_id");
    if (!vocab.contains(id)) {
      throw Error(ErrorKind::InvalidPrompt, "prompt token " + std::to_string(id) + " outside vocabulary");
    }
  }
  TokenSequence seq;
  seq.tokens = prompt;
  seq.tokens.resize(prompt.size() + gen_len, vocab.mask_id());
  seq.prompt_len = prompt.size();
  seq.gen_len = gen_len;
  seq.mask_id = vocab.mask_id();
  return seq;
}

void check_sequence(const TokenSequence& seq, const Vocabulary& vocab) {
  if (seq.tokens.size() != seq.prompt_len + seq.gen_len) {
    throw Error(ErrorKind::InvalidInput, "sequence length != prompt_len + gen_len");
  }
  if (seq.mask_id != vocab.mask_id()) throw Error(ErrorKind::ModelMismatch, "mask_id differs");
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (!vocab.contains(seq.tokens[i])) {
      throw Error(ErrorKind::ModelMismatch, "token at position " + std::to_string(i) + " outside vocabulary");
    }
    if (i < seq.prompt_len && seq.tokens[i] == seq.mask_id) {
      throw Error(ErrorKind::InvalidPrompt, "masked prompt position " + std::to_string(i));
    }
  }
}

std::vector<std::size_t> masked_positions(const TokenSequence& seq) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (seq.tokens[i] == seq.mask_id) out.push_back(i);
  }
  return out;
}

std::string_view to_string(RemaskStrategy s) {
  return s == RemaskStrategy::random ? "random" : "low_confidence";
}

RemaskStrategy parse_remask_strategy(std::string_view text) {
  if (text == "random") return RemaskStrategy::random;
  if (text == "low_confidence" || text == "low_conf") return RemaskStrategy::low_confidence;
  throw Error(ErrorKind::InvalidConfig, "remask_strategy");
}

void validate_config(const DecodeConfig& cfg) {
  auto fail = [](const char* field) { throw Error(ErrorKind::InvalidConfig, field); };
  if (cfg.t_max < 1) fail("t_max");
  if (cfg.gen_len < 1) fail("gen_len");
  if (cfg.block_len < 1 || cfg.block_len > cfg.gen_len || cfg.gen_len % cfg.block_len != 0) {
    fail("block_len");
  }
  for (double tau : {cfg.tau_high, cfg.tau_mid, cfg.tau_low}) {
    if (std::isnan(tau)) fail("tau");
  }
  if (!(cfg.tau_high >= cfg.tau_mid && cfg.tau_mid >= cfg.tau_low)) fail("tau ordering");
  if (!(cfg.tau_low >= 0.0)) fail("tau_low");
  if (!(cfg.p1 > 0.0 && cfg.p1 < cfg.p2 && cfg.p2 < 1.0)) fail("breakpoints");
  if (!(cfg.temperature >= 0.0) || !std::isfinite(cfg.temperature)) fail("temperature");
  if (cfg.answer_region && cfg.answer_region->start >= cfg.answer_region->end) fail("answer_region");
}

AnswerRegion resolve_answer_region(const DecodeConfig& cfg, const TokenSequence& seq) {
  if (!cfg.answer_region) return {seq.gen_begin(), seq.gen_end()};
  const AnswerRegion r = *cfg.answer_region;
  if (!(seq.prompt_len <= r.start && r.start < r.end && r.end <= seq.size())) {
    throw Error(ErrorKind::InvalidConfig, "answer_region");
  }
  return r;
}

}  // namespace prophet
