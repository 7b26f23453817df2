// Serial vs OpenMP row kernels, n-gram prediction, and one decode.
//
//   ./build/bench/bench_kernels --benchmark_filter=rows

#include <benchmark/benchmark.h>

#include "prophet/decoder.hpp"
#include "prophet/early_commit.hpp"
#include "prophet/kernels.hpp"
#include "prophet/models.hpp"
#include "prophet/rng.hpp"

using namespace prophet;

namespace {

LogitMatrix make_logits(std::size_t n, std::size_t vocab) {
  Rng rng(1);
  LogitMatrix m(n, vocab, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t v = 1; v < vocab; ++v) m.set(i, static_cast<TokenId>(v), rng.uniform() * 10.0);
  }
  return m;
}

template <auto Kernel>
void rows(benchmark::State& state) {
  const auto m = make_logits(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(m));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

void row_args(benchmark::internal::Benchmark* b) {
  b->Args({256, 512})->Args({256, 32000})->Args({1024, 4096});
}

BENCHMARK(rows<kernels::serial::argmax_rows>)->Name("argmax_rows/serial")->Apply(row_args);
BENCHMARK(rows<kernels::omp::argmax_rows>)->Name("argmax_rows/omp")->Apply(row_args);
BENCHMARK(rows<kernels::serial::gap_rows>)->Name("gap_rows/serial")->Apply(row_args);
BENCHMARK(rows<kernels::omp::gap_rows>)->Name("gap_rows/omp")->Apply(row_args);
BENCHMARK(rows<kernels::serial::top_prob_rows>)->Name("top_prob_rows/serial")->Apply(row_args);
BENCHMARK(rows<kernels::omp::top_prob_rows>)->Name("top_prob_rows/omp")->Apply(row_args);

NGramDenoiser toy_model(std::size_t vocab) {
  Rng rng(2);
  std::vector<std::vector<TokenId>> corpus(2000);
  for (auto& seq : corpus) {
    TokenId x = 1 + static_cast<TokenId>(rng.below(vocab - 1));
    for (int i = 0; i < 32; ++i) {
      seq.push_back(x);
      x = 1 + x % static_cast<TokenId>(vocab - 1);
    }
  }
  return train_ngram(corpus, 1, 1.0, Vocabulary(vocab, 0));
}

void ngram_predict(benchmark::State& state) {
  const auto vocab = static_cast<std::size_t>(state.range(1));
  const auto model = toy_model(vocab);
  auto seq = new_sequence({1, 2, 3, 4}, static_cast<std::size_t>(state.range(0)), model.vocab());
  for (auto _ : state) benchmark::DoNotOptimize(model.predict_logits(seq, 1));
}
BENCHMARK(ngram_predict)->Args({256, 64})->Args({256, 1024});

void decode(benchmark::State& state) {
  const auto model = toy_model(64);
  DecodeConfig cfg;
  cfg.gen_len = 256;
  cfg.block_len = 32;
  cfg.t_max = 50;
  cfg.prophet_enabled = state.range(0) != 0;
  const auto seq0 = new_sequence({1, 2, 3, 4}, cfg.gen_len, model.vocab());
  for (auto _ : state) {
    if (cfg.prophet_enabled) {
      benchmark::DoNotOptimize(decode_prophet(model, seq0, cfg));
    } else {
      benchmark::DoNotOptimize(decode_full(model, seq0, cfg));
    }
  }
}
BENCHMARK(decode)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
