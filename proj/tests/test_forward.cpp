#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "prophet/error.hpp"
#include "prophet/forward.hpp"

using namespace prophet;

namespace {

TokenSequence clean(std::size_t prompt_len, std::size_t gen_len, const Vocabulary& v, Rng& rng) {
  auto seq = new_sequence(testing::random_prompt(prompt_len, v, rng), gen_len, v);
  const auto content = v.content_tokens();
  for (std::size_t i = seq.gen_begin(); i < seq.gen_end(); ++i) seq.tokens[i] = content[rng.below(content.size())];
  return seq;
}

std::size_t count_masked(const TokenSequence& s) { return masked_positions(s).size(); }

}  // namespace

TEST_SUITE("forward") {

TEST_CASE("noise level domain") {
  CHECK_NOTHROW(NoiseLevel(1.0));
  CHECK_THROWS_AS(NoiseLevel(0.0), Error);
  CHECK_THROWS_AS(NoiseLevel(1.01), Error);
  CHECK(NoiseLevel::from_step(25, 50).value() == 0.5);
}

TEST_CASE("corrupt at t = 1 masks every generation position and no prompt position") {
  Vocabulary v(10, 0);
  Rng rng(1);
  const auto x0 = clean(3, 40, v, rng);
  const auto xt = corrupt(x0, NoiseLevel(1.0), rng);
  CHECK(count_masked(xt) == 40);
  for (std::size_t i = 0; i < 3; ++i) CHECK(xt.tokens[i] == x0.tokens[i]);
}

TEST_CASE("corrupt near t = 0 leaves the sequence alone") {
  Vocabulary v(10, 0);
  Rng rng(2);
  const auto x0 = clean(0, 1000, v, rng);
  CHECK(corrupt(x0, NoiseLevel(1e-12), rng) == x0);
}

TEST_CASE("corrupt masked count is binomial") {
  Vocabulary v(10, 0);
  Rng rng(3);
  const auto x0 = clean(0, 10000, v, rng);
  const double sigma = std::sqrt(10000 * 0.3 * 0.7);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng r(seed);
    const auto n = static_cast<double>(count_masked(corrupt(x0, NoiseLevel(0.3), r)));
    CHECK(std::abs(n - 3000.0) <= 3.0 * sigma);
  }
}

TEST_CASE("tau-leap keeps unmasked tokens and respects the stay probability") {
  Vocabulary v(6, 0);
  Rng rng(4);
  const auto x0 = clean(2, 200, v, rng);
  const auto p = Predictor::one_hot(x0.tokens, v.size());
  std::size_t stayed = 0, masked_before = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto xt = corrupt(x0, NoiseLevel(1.0), rng);
    const auto xs = tau_leap_step(xt, NoiseLevel(1.0), NoiseLevel(0.5), p, rng);
    for (std::size_t i = 0; i < xt.size(); ++i) {
      if (!xt.is_masked(i)) {
        REQUIRE(xs.tokens[i] == xt.tokens[i]);
      } else {
        ++masked_before;
        if (xs.is_masked(i)) {
          ++stayed;
        } else {
          REQUIRE(xs.tokens[i] == x0.tokens[i]);
        }
      }
    }
  }
  const double n = static_cast<double>(masked_before);
  const double sigma = std::sqrt(n * 0.25);
  CHECK(std::abs(static_cast<double>(stayed) - 0.5 * n) <= 3.0 * sigma);
}

TEST_CASE("tau-leap on one masked position: unmask frequency") {
  Vocabulary v(4, 0);
  TokenSequence x{{0}, 0, 1, 0};
  const Predictor p = Predictor::one_hot({2}, 4);
  Rng rng(5);
  const int trials = 100000;
  int unmasked = 0;
  for (int k = 0; k < trials; ++k) {
    unmasked += !tau_leap_step(x, NoiseLevel(0.8), NoiseLevel(0.2), p, rng).is_masked(0);
  }
  const double sigma = std::sqrt(0.75 * 0.25 / trials);
  CHECK(sigma == doctest::Approx(0.00137).epsilon(0.01));
  CHECK(std::abs(unmasked / double(trials) - 0.75) <= 3.0 * sigma);
}

TEST_CASE("monotone unmasking and immutability along a chain") {
  Vocabulary v(7, 3);
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x0 = clean(rng.below(4), 1 + rng.below(30), v, rng);
    const int T = 10;
    auto x = corrupt(x0, NoiseLevel(1.0), rng);
    for (int k = T; k > 1; --k) {
      const auto p = Predictor::one_hot(x0.tokens, v.size());
      const auto next = tau_leap_step(x, NoiseLevel::from_step(k, T), NoiseLevel::from_step(k - 1, T), p, rng);
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!x.is_masked(i)) REQUIRE(next.tokens[i] == x.tokens[i]);
        if (!next.is_masked(i)) REQUIRE(next.tokens[i] == x0.tokens[i]);
      }
      x = next;
    }
  }
}

TEST_CASE("kernel normalisation") {
  Vocabulary v(9, 2);
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto logits = testing::random_logits(1, v, rng, 50);
    const auto p = Predictor::softmax(logits, 0.5 + rng.uniform());
    const double t = 0.05 + 0.95 * rng.uniform();
    const double s = t * rng.uniform() * 0.999 + 1e-9;
    REQUIRE(std::abs(kernel_mass(NoiseLevel(t), NoiseLevel(s), p.row(0), v.mask_id()) - 1.0) < 1e-9);
  }
}

TEST_CASE("tau-leap errors") {
  Vocabulary v(4, 0);
  TokenSequence x{{0, 0}, 0, 2, 0};
  const auto p = Predictor::one_hot({1, 2}, 4);
  Rng rng(8);
  CHECK_THROWS_AS(tau_leap_step(x, NoiseLevel(0.5), NoiseLevel(0.5), p, rng), Error);
  try {
    tau_leap_step(x, NoiseLevel(0.5), NoiseLevel(0.7), p, rng);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidTransition);
  }
  Predictor bad = p;
  bad.probs[1] = 0.5;
  CHECK_THROWS_AS(tau_leap_step(x, NoiseLevel(0.5), NoiseLevel(0.2), bad, rng), Error);
  Predictor onto_mask = Predictor::one_hot({0, 2}, 4);
  CHECK_THROWS_AS(tau_leap_step(x, NoiseLevel(0.5), NoiseLevel(0.2), onto_mask, rng), Error);
}

TEST_CASE("categorical sampling follows the cumulative mass") {
  const std::vector<double> p{0.0, 0.25, 0.0, 0.75};
  CHECK(sample_categorical(p, 0.0) == 1);
  CHECK(sample_categorical(p, 0.2499) == 1);
  CHECK(sample_categorical(p, 0.25) == 3);
  CHECK(sample_categorical(p, 0.999999) == 3);
}

TEST_CASE("softmax values") {
  Vocabulary v(3, 2);
  LogitMatrix m(1, 3, 2);
  m.set(0, 0, 5.0);
  m.set(0, 1, 1.0);
  const auto p = Predictor::softmax(m);
  CHECK(p.row(0)[0] == doctest::Approx(1.0 / (1.0 + std::exp(-4.0))));
  CHECK(p.row(0)[2] == 0.0);
}

}  // TEST_SUITE
