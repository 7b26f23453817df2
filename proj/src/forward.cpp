#include "prophet/forward.hpp"

#include <cmath>
#include <string>

#include "prophet/error.hpp"

namespace prophet {

NoiseLevel::NoiseLevel(double t) : t_(t) {
  if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidInput, "noise level must lie in (0, 1]");
}

NoiseLevel NoiseLevel::from_step(int k, int total_steps) {
  if (total_steps < 1 || k < 1 || k > total_steps) {
    throw Error(ErrorKind::InvalidInput, "step outside [1, total_steps]");
  }
  return NoiseLevel(static_cast<double>(k) / static_cast<double>(total_steps));
}

Predictor Predictor::softmax(const LogitMatrix& logits, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorKind::InvalidInput, "softmax temperature must be > 0");
  Predictor p;
  p.n_positions = logits.n_positions();
  p.vocab_size = logits.vocab_size();
  p.probs.assign(p.n_positions * p.vocab_size, 0.0);
  const auto mask = static_cast<std::size_t>(logits.mask_id());
  for (std::size_t i = 0; i < p.n_positions; ++i) {
    const auto row = logits.row(i);
    double top = -INFINITY;
    for (std::size_t v = 0; v < row.size(); ++v) {
      if (v != mask && row[v] > top) top = row[v];
    }
    double denom = 0.0;
    double* out = p.probs.data() + i * p.vocab_size;
    for (std::size_t v = 0; v < row.size(); ++v) {
      if (v == mask) continue;
      out[v] = std::exp((row[v] - top) / temperature);
      denom += out[v];
    }
    for (std::size_t v = 0; v < row.size(); ++v) out[v] /= denom;
  }
  return p;
}

Predictor Predictor::one_hot(const std::vector<TokenId>& tokens, std::size_t vocab_size) {
  Predictor p;
  p.n_positions = tokens.size();
  p.vocab_size = vocab_size;
  p.probs.assign(p.n_positions * vocab_size, 0.0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    p.probs[i * vocab_size + static_cast<std::size_t>(tokens[i])] = 1.0;
  }
  return p;
}

TokenSequence corrupt(const TokenSequence& x0, NoiseLevel t, Rng& rng) {
  TokenSequence out = x0;
  for (std::size_t i = x0.gen_begin(); i < x0.gen_end(); ++i) {
    if (rng.uniform() < t.value()) out.tokens[i] = x0.mask_id;
  }
  return out;
}

TokenId sample_categorical(std::span<const double> probs, double u) {
  double acc = 0.0;
  std::size_t last = probs.size();
  for (std::size_t v = 0; v < probs.size(); ++v) {
    if (probs[v] <= 0.0) continue;
    acc += probs[v];
    last = v;
    if (u < acc) return static_cast<TokenId>(v);
  }
  // Rounding left u above the accumulated mass; take the last supported id.
  if (last == probs.size()) throw Error(ErrorKind::InvalidInput, "probability row has no mass");
  return static_cast<TokenId>(last);
}

namespace {

void check_predictor(const TokenSequence& x, const Predictor& p) {
  if (p.n_positions != x.size() || p.probs.size() != p.n_positions * p.vocab_size) {
    throw Error(ErrorKind::InvalidInput, "predictor shape does not match sequence");
  }
  const auto mask = static_cast<std::size_t>(x.mask_id);
  if (mask >= p.vocab_size) throw Error(ErrorKind::InvalidInput, "predictor lacks the mask column");
  for (std::size_t i = 0; i < p.n_positions; ++i) {
    if (!x.is_masked(i)) continue;
    const auto row = p.row(i);
    double sum = 0.0;
    for (double q : row) {
      if (!(q >= 0.0)) throw Error(ErrorKind::InvalidInput, "negative predictor probability");
      sum += q;
    }
    if (row[mask] != 0.0 || std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidInput,
                  "predictor row " + std::to_string(i) + " is not a distribution over non-mask tokens");
    }
  }
}

}  // namespace

TokenSequence tau_leap_step(const TokenSequence& x_t, NoiseLevel t, NoiseLevel s,
                            const Predictor& predictor, Rng& rng) {
  if (!(s.value() < t.value())) throw Error(ErrorKind::InvalidTransition, "requires s < t");
  check_predictor(x_t, predictor);
  const double stay = s.value() / t.value();
  TokenSequence out = x_t;
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    if (!x_t.is_masked(i)) continue;
    if (rng.uniform() < stay) continue;
    out.tokens[i] = sample_categorical(predictor.row(i), rng.uniform());
  }
  return out;
}

double kernel_mass(NoiseLevel t, NoiseLevel s, std::span<const double> predictor_row, TokenId mask_id) {
  if (!(s.value() < t.value())) throw Error(ErrorKind::InvalidTransition, "requires s < t");
  const double stay = s.value() / t.value();
  const double move = (t.value() - s.value()) / t.value();
  double mass = stay;
  for (std::size_t v = 0; v < predictor_row.size(); ++v) {
    if (static_cast<TokenId>(v) != mask_id) mass += move * predictor_row[v];
  }
  return mass;
}

}  // namespace prophet
