#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prophet {

using TokenId = std::int32_t;

// Vocabulary of token ids [0, size) with one id reserved for [MASK].
class Vocabulary {
 public:
  Vocabulary(std::size_t size, TokenId mask_id, std::vector<std::string> token_names = {});

  std::size_t size() const noexcept { return size_; }
  TokenId mask_id() const noexcept { return mask_id_; }
  bool has_names() const noexcept { return !token_names_.empty(); }
  const std::vector<std::string>& token_names() const noexcept { return token_names_; }

  bool contains(TokenId id) const noexcept {
    return id >= 0 && static_cast<std::size_t>(id) < size_;
  }
  std::string name(TokenId id) const;

  // Non-mask ids in ascending order.
  std::vector<TokenId> content_tokens() const;

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  std::size_t size_;
  TokenId mask_id_;
  std::vector<std::string> token_names_;
};

// Prompt followed by the generation region. Prompt positions are never masked.
struct TokenSequence {
  std::vector<TokenId> tokens;
  std::size_t prompt_len = 0;
  std::size_t gen_len = 0;
  TokenId mask_id = 0;

  std::size_t size() const noexcept { return tokens.size(); }
  bool is_masked(std::size_t i) const noexcept { return tokens[i] == mask_id; }
  std::size_t gen_begin() const noexcept { return prompt_len; }
  std::size_t gen_end() const noexcept { return prompt_len + gen_len; }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

// Throws InvalidPrompt / InvalidConfig.
TokenSequence new_sequence(const std::vector<TokenId>& prompt, std::size_t gen_len,
                           const Vocabulary& vocab);

// Checks the TokenSequence invariants against a vocabulary; throws InvalidInput.
void check_sequence(const TokenSequence& seq, const Vocabulary& vocab);

std::vector<std::size_t> masked_positions(const TokenSequence& seq);

// Half-open range of absolute positions [start, end).
struct AnswerRegion {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - start; }
  bool contains(std::size_t i) const noexcept { return i >= start && i < end; }

  friend bool operator==(const AnswerRegion&, const AnswerRegion&) = default;
};

enum class RemaskStrategy { random, low_confidence };

std::string_view to_string(RemaskStrategy s);
RemaskStrategy parse_remask_strategy(std::string_view text);

struct DecodeConfig {
  int t_max = 50;
  std::size_t gen_len = 256;
  std::size_t block_len = 32;
  RemaskStrategy remask_strategy = RemaskStrategy::low_confidence;
  bool prophet_enabled = false;
  double tau_high = 8.0;
  double tau_mid = 5.0;
  double tau_low = 3.0;
  double p1 = 0.33;
  double p2 = 0.67;
  // Absent means the full generation region.
  std::optional<AnswerRegion> answer_region;
  std::uint64_t seed = 0;
  bool record_top1 = false;
  double temperature = 0.0;
};

// Throws Error(InvalidConfig, field) naming the first violated invariant.
void validate_config(const DecodeConfig& cfg);

// Answer region for a concrete sequence; throws InvalidConfig("answer_region")
// when the configured region falls outside the generation region.
AnswerRegion resolve_answer_region(const DecodeConfig& cfg, const TokenSequence& seq);

struct StepRecord {
  int t = 0;
  double progress = 0.0;
  // +infinity when no answer-region position was masked at this step.
  double mean_gap = 0.0;
  std::vector<std::size_t> unmasked_positions;
  std::optional<std::vector<TokenId>> top1;
  bool committed = false;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct DecodeTrace {
  int t_max = 0;
  std::vector<StepRecord> steps;
  std::optional<int> commit_step;
  int model_calls = 0;

  friend bool operator==(const DecodeTrace&, const DecodeTrace&) = default;
};

inline double progress_at(int t_max, int t) {
  return static_cast<double>(t_max - t) / static_cast<double>(t_max);
}

inline constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

}  // namespace prophet
