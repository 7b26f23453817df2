#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "prophet/core.hpp"
#include "prophet/logits.hpp"

namespace prophet {

// Produces logits for a partially masked sequence at step counter t.
// Implementations must be pure functions of (seq, t) and safe to call
// concurrently.
class DenoiserModel {
 public:
  virtual ~DenoiserModel() = default;

  virtual const Vocabulary& vocab() const = 0;
  virtual LogitMatrix predict_logits(const TokenSequence& seq, int t) const = 0;
};

// Test double: one full logit matrix per step counter, independent of content.
class ScriptedOracle final : public DenoiserModel {
 public:
  // schedule[k] is the matrix returned at t = k + 1. Mask columns are reset
  // to the sentinel; non-finite entries are rejected.
  ScriptedOracle(Vocabulary vocab, std::vector<LogitMatrix> schedule);

  // Same matrix at every step in [1, t_max].
  static ScriptedOracle constant(Vocabulary vocab, const LogitMatrix& m, int t_max);

  const Vocabulary& vocab() const override { return vocab_; }
  LogitMatrix predict_logits(const TokenSequence& seq, int t) const override;

  int t_max() const noexcept { return static_cast<int>(schedule_.size()); }
  const LogitMatrix& at_step(int t) const;

 private:
  Vocabulary vocab_;
  std::vector<LogitMatrix> schedule_;
};

/**
 * Oracle whose predictions settle at step t_star.
 *
 * For t > t_star every generation position's top-1 is a decoy (cycling with
 * t) that leads the runner-up by exactly pre_gap. For t <= t_star the top-1
 * is target[i] with margin exactly post_gap. Prompt rows are flat.
 *
 * Throws InvalidInput for bad gaps or t_star, ModelMismatch when the target
 * length differs from the generation length.
 */
ScriptedOracle make_ramp_oracle(int t_star, double pre_gap, double post_gap,
                                const std::vector<TokenId>& target, int t_max,
                                const Vocabulary& vocab, std::size_t prompt_len = 0);

// Count-based denoiser over a window of `order` tokens on each side.
class NGramDenoiser final : public DenoiserModel {
 public:
  static constexpr TokenId kBoundary = -1;

  // Left slots in positional order (i-w .. i-1), then right slots (i+1 .. i+w).
  using Context = std::vector<TokenId>;
  using Counts = std::map<Context, std::map<TokenId, std::uint64_t>>;

  NGramDenoiser(Vocabulary vocab, std::size_t order, double alpha, Counts counts = {});

  const Vocabulary& vocab() const override { return vocab_; }
  LogitMatrix predict_logits(const TokenSequence& seq, int t) const override;

  std::size_t order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  const Counts& counts() const noexcept { return counts_; }
  std::size_t context_count() const noexcept { return counts_.size(); }

  std::uint64_t count(const Context& ctx, TokenId v) const;

  // Context used for training (all neighbours visible).
  Context training_context(const std::vector<TokenId>& tokens, std::size_t i) const;
  // Context used at inference: nearest unmasked tokens within the window on
  // each side, boundary sentinel in the remaining slots.
  Context inference_context(const TokenSequence& seq, std::size_t i) const;

  void add_occurrence(const Context& ctx, TokenId v, std::uint64_t n = 1);

  void save(std::ostream& out) const;
  std::string to_text() const;
  // Throws ParseError with the offending line number.
  static NGramDenoiser load(std::istream& in);
  static NGramDenoiser load_file(const std::string& path);

 private:
  void fill_row(const TokenSequence& seq, std::size_t i, std::span<double> row) const;

  Vocabulary vocab_;
  std::size_t order_;
  double alpha_;
  Counts counts_;
};

// Throws EmptyCorpus, InvalidInput (mask id or out-of-range token in corpus, alpha <= 0).
NGramDenoiser train_ngram(const std::vector<std::vector<TokenId>>& corpus, std::size_t order,
                          double alpha, const Vocabulary& vocab);

}  // namespace prophet
