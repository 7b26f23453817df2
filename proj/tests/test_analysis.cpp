#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "prophet/analysis.hpp"
#include "prophet/decoder.hpp"
#include "prophet/early_commit.hpp"
#include "prophet/error.hpp"
#include "prophet/io.hpp"
#include "prophet/kernels.hpp"

using namespace prophet;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

// gen_len 20 in one block over 10 steps, low-confidence order. Every ramp
// row has the same confidence, so positions unmask left to right, two per
// step, and the tail [10, 20) is still masked at t = 7.
struct RampRun {
  DecodeResult result;
  std::vector<TokenId> answer;
  AnswerRegion region{10, 20};
};

RampRun ramp_run(int t_star) {
  Vocabulary v(8, 0);
  std::vector<TokenId> target(20);
  for (std::size_t g = 0; g < 20; ++g) target[g] = static_cast<TokenId>(1 + g % 7);
  const auto o = make_ramp_oracle(t_star, 1.0, 9.0, target, 10, v);
  DecodeConfig c;
  c.gen_len = 20;
  c.block_len = 20;
  c.t_max = 10;
  c.record_top1 = true;
  RampRun r{decode_full(o, new_sequence({}, 20, v), c), {target.begin() + 10, target.end()}};
  return r;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("first match on a ramp oracle") {
  const auto run = ramp_run(7);
  const auto s = first_match_step(run.result.trace, run.answer, run.region);
  CHECK(s.first_match_t == 7);
  CHECK(s.first_match_fraction == 0.4);
  CHECK(s.stable_from_t == 7);
  CHECK(s.stable_from_fraction == 0.4);
  CHECK(decoded_region_tokens(run.result.trace, run.region) == run.answer);
}

TEST_CASE("stable from the first step") {
  const auto run = ramp_run(10);
  const auto s = first_match_step(run.result.trace, run.answer, run.region);
  CHECK(s.first_match_fraction == 0.1);
  CHECK(s.stable_from_fraction == 0.1);
}

TEST_CASE("first match errors") {
  const auto run = ramp_run(7);
  // The head of the generation region was filled with decoys.
  CHECK(kind_of([&] { first_match_step(run.result.trace, run.answer, AnswerRegion{0, 10}); }) ==
        ErrorKind::NotApplicable);
  CHECK(kind_of([&] { first_match_step(run.result.trace, {1, 2}, run.region); }) == ErrorKind::InvalidInput);
  auto stripped = run.result.trace;
  stripped.steps[3].top1.reset();
  CHECK(kind_of([&] { first_match_step(stripped, run.answer, run.region); }) == ErrorKind::MissingTop1);
  CHECK(kind_of([&] { dynamics_matrix(stripped); }) == ErrorKind::MissingTop1);
}

TEST_CASE("committed traces measure against the full budget") {
  DecodeTrace t;
  t.t_max = 10;
  t.commit_step = 8;
  for (int s = 10; s >= 8; --s) {
    StepRecord r;
    r.t = s;
    r.top1 = std::vector<TokenId>{5, s == 10 ? 3 : 4};
    t.steps.push_back(r);
  }
  t.steps.back().unmasked_positions = {1};
  t.steps.back().committed = true;
  const auto stats = first_match_step(t, {4}, {1, 2});
  CHECK(stats.first_match_t == 9);
  CHECK(stats.first_match_fraction == 0.2);
  CHECK(stats.stable_from_fraction == 0.2);
}

TEST_CASE("histogram summaries") {
  std::vector<double> f(97, 0.4);
  f.insert(f.end(), 3, 0.9);
  auto h = convergence_histogram(f, 10);
  CHECK(h.frac_le_50 == 0.97);
  CHECK(h.le_50 == 97);
  CHECK(h.bins[3].count == 97);
  CHECK(h.bins[8].count == 3);

  h = convergence_histogram(std::vector<double>(5, 1.0), 10);
  CHECK(h.frac_le_50 == 0.0);
  CHECK(h.frac_le_70 == 0.0);
  CHECK(h.bins[9].count == 5);

  h = convergence_histogram({0.5}, 10);
  CHECK(h.frac_le_50 == 1.0);
  CHECK(h.bins[4].count == 1);

  h = convergence_histogram({0.7, 0.71, 0.02}, 4);
  CHECK(h.le_70 == 2);
  CHECK(h.bins[0].count == 1);
  CHECK(h.bins[2].count == 2);

  CHECK(kind_of([] { convergence_histogram({}, 10); }) == ErrorKind::EmptyInput);
  CHECK(kind_of([] { convergence_histogram({0.0}, 10); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { convergence_histogram({1.5}, 10); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { convergence_histogram({0.5}, 0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("histogram bins by hand count") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t bins = 1 + rng.below(20);
    std::vector<double> f;
    std::vector<std::size_t> want(bins, 0);
    std::size_t le50 = 0;
    for (int k = 0; k < 200; ++k) {
      // Values on a 1/100 grid; bin edges are checked with integer arithmetic.
      const int hundredths = 1 + static_cast<int>(rng.below(100));
      f.push_back(hundredths / 100.0);
      std::size_t b = 0;
      while (static_cast<std::size_t>(hundredths) * bins > (b + 1) * 100) ++b;
      ++want[b];
      le50 += hundredths <= 50;
    }
    const auto h = convergence_histogram(f, bins);
    for (std::size_t b = 0; b < bins; ++b) REQUIRE(h.bins[b].count == want[b]);
    REQUIRE(h.le_50 == le50);
  }
}

TEST_CASE("dynamics of a constant oracle") {
  Vocabulary v(5, 0);
  Rng rng(2);
  const auto o = ScriptedOracle::constant(v, testing::random_logits(6, v, rng), 6);
  DecodeConfig c;
  c.gen_len = 6;
  c.block_len = 3;
  c.t_max = 6;
  c.record_top1 = true;
  const auto r = decode_full(o, new_sequence({}, 6, v), c);
  const auto m = dynamics_matrix(r.trace);
  CHECK(m.count(DynamicsClass::decoded) == 6);
  CHECK(m.count(DynamicsClass::changed) == 0);
  CHECK(m.count(DynamicsClass::unchanged) == 30);
  for (std::size_t pos = 0; pos < 6; ++pos) {
    std::size_t decoded = 0;
    for (std::size_t k = 0; k < 6; ++k) decoded += m.at(pos, k) == DynamicsClass::decoded;
    CHECK(decoded == 1);
  }
}

TEST_CASE("dynamics of a ramp oracle") {
  const auto run = ramp_run(6);
  const auto m = dynamics_matrix(run.result.trace);
  CHECK(m.count(DynamicsClass::changed) > 0);
  for (std::size_t k = 0; k < m.steps.size(); ++k) {
    for (std::size_t pos = 0; pos < m.n_positions; ++pos) {
      // Switching from decoy to target shows up at t* itself; nothing moves afterwards.
      if (m.steps[k] < 6) REQUIRE(m.at(pos, k) != DynamicsClass::changed);
      if (k == 0) REQUIRE(m.at(pos, k) != DynamicsClass::changed);
    }
  }
}

TEST_CASE("decoded cells are never followed by changes") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Vocabulary v(3 + rng.below(6), 0);
    const auto shape = testing::random_shape(rng, 16, 20);
    const auto o = testing::random_oracle(shape.gen_len, v, shape.t_max, rng);
    DecodeConfig c;
    c.gen_len = shape.gen_len;
    c.block_len = shape.block_len;
    c.t_max = shape.t_max;
    c.record_top1 = true;
    c.seed = rng.next_u64();
    const auto m = dynamics_matrix(decode_full(o, new_sequence({}, shape.gen_len, v), c).trace);
    REQUIRE(m.count(DynamicsClass::decoded) == shape.gen_len);
    for (std::size_t pos = 0; pos < m.n_positions; ++pos) {
      bool done = false;
      for (std::size_t k = 0; k < m.steps.size(); ++k) {
        if (done) REQUIRE(m.at(pos, k) == DynamicsClass::unchanged);
        done = done || m.at(pos, k) == DynamicsClass::decoded;
      }
      REQUIRE(done);
    }
  }
}

TEST_CASE("speedup formatting") {
  CHECK(format_speedup(speedup(50, 50)) == "1.00×");
  CHECK(format_speedup(speedup(50, 11)) == "4.55×");
  CHECK(table_cell(54.0, 2.34) == "54.0 (2.34×)");
  CHECK(table_cell(89.0, 3.4) == "89.0 (3.40×)");
  CHECK(kind_of([] { speedup(50, 0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("agreement") {
  TokenSequence a{{1, 2, 3, 4, 5}, 1, 4, 0};
  CHECK(agreement(a, a, {1, 5}).exact);
  CHECK(agreement(a, a, {1, 5}).token_match_fraction == 1.0);
  auto b = a;
  b.tokens[3] = 9;
  const auto ag = agreement(a, b, {1, 5});
  CHECK_FALSE(ag.exact);
  CHECK(ag.token_match_fraction == 0.75);
  CHECK(agreement(a, b, {1, 3}).exact);
  CHECK(kind_of([&] { agreement(a, b, {1, 6}); }) == ErrorKind::InvalidInput);
}

}  // TEST_SUITE
