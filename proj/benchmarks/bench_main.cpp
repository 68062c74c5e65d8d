#include <memory>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "triplesum/beam_search.hpp"
#include "triplesum/generation.hpp"
#include "triplesum/metrics.hpp"

using namespace triplesum;

namespace {

std::unique_ptr<Triples2Seq> make_model(CellKind cell, std::size_t m, std::size_t target_size) {
  ModelConfig c;
  c.cell = cell;
  c.m = m;
  c.e_max = 8;
  c.source_size = 400;
  c.target_size = target_size;
  auto model = std::make_unique<Triples2Seq>(c);
  model->initialize(1, -0.1, 0.1);
  return model;
}

std::vector<EncodedTriple> some_triples(std::size_t n) {
  std::vector<EncodedTriple> t;
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(i);
    t.push_back({9 + k, 100 + k, 200 + k});
  }
  return t;
}

void BM_DecoderStep(benchmark::State& state) {
  const auto cell = state.range(0) ? CellKind::lstm : CellKind::gru;
  const auto batch = static_cast<std::size_t>(state.range(1));
  const auto model = make_model(cell, 256, 3000);
  const auto triples = some_triples(6);
  ModelScorer scorer(*model, triples);
  const std::vector<ModelScorer::State> states(batch, scorer.initial());
  const std::vector<int> tokens(batch, kStartIndex);
  for (auto _ : state) benchmark::DoNotOptimize(scorer.advance(states, tokens));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch));
}
BENCHMARK(BM_DecoderStep)->Args({0, 1})->Args({0, 10})->Args({1, 1})->Args({1, 10});

void BM_BeamSearch(benchmark::State& state) {
  const auto model = make_model(CellKind::gru, 128, 2000);
  const auto triples = some_triples(6);
  BeamConfig cfg;
  cfg.beam_width = static_cast<std::size_t>(state.range(0));
  cfg.max_length = 30;
  for (auto _ : state) {
    ModelScorer scorer(*model, triples);
    benchmark::DoNotOptimize(beam_search(scorer, cfg));
  }
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_CorpusBleu(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(5, 40), tok(0, 300);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Tokens> cand(n), ref(n);
  for (auto* side : {&cand, &ref})
    for (auto& s : *side) {
      const int k = len(rng);
      for (int i = 0; i < k; ++i) s.push_back("w" + std::to_string(tok(rng)));
    }
  for (auto _ : state) benchmark::DoNotOptimize(bleu(cand, ref, 4));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_CorpusBleu)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
