#pragma once

#include <cstddef>
#include <vector>

#include "prophet/core.hpp"
#include "prophet/logits.hpp"
#include "prophet/rng.hpp"

namespace prophet {

// Corruption level in (0, 1]; the expected fraction of masked positions.
class NoiseLevel {
 public:
  explicit NoiseLevel(double t);
  double value() const noexcept { return t_; }

  // Discrete step k of a T-step chain maps to k / T.
  static NoiseLevel from_step(int k, int total_steps);

 private:
  double t_;
};

// Per-position probability rows over the vocabulary.
struct Predictor {
  std::size_t n_positions = 0;
  std::size_t vocab_size = 0;
  std::vector<double> probs;

  std::span<const double> row(std::size_t i) const {
    return {probs.data() + i * vocab_size, vocab_size};
  }

  // Softmax of each logit row (mask column gets probability 0).
  static Predictor softmax(const LogitMatrix& logits, double temperature = 1.0);
  // Point mass on tokens[i] at every position.
  static Predictor one_hot(const std::vector<TokenId>& tokens, std::size_t vocab_size);
};

// Masks each generation position independently with probability t.
// Draws one uniform per generation position in ascending order.
TokenSequence corrupt(const TokenSequence& x0, NoiseLevel t, Rng& rng);

/**
 * One tau-leaping transition from level t to level s < t.
 *
 * Unmasked tokens are copied. A masked position stays masked with
 * probability s/t and is otherwise filled with a draw from its predictor
 * row. Draws happen in ascending position order: one uniform per masked
 * position, plus one more for the categorical draw when it unmasks.
 *
 * Throws InvalidTransition when s >= t, InvalidInput when the predictor
 * shape or a row's normalisation is wrong.
 */
TokenSequence tau_leap_step(const TokenSequence& x_t, NoiseLevel t, NoiseLevel s,
                            const Predictor& predictor, Rng& rng);

// Probability mass of the three kernel cases at a masked position, summed.
double kernel_mass(NoiseLevel t, NoiseLevel s, std::span<const double> predictor_row,
                   TokenId mask_id);

// Inverse-CDF draw from a probability row, skipping zero-mass entries.
TokenId sample_categorical(std::span<const double> probs, double u);

}  // namespace prophet
