#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "triplesum/beam_search.hpp"
#include "triplesum/corpus.hpp"
#include "triplesum/metrics.hpp"
#include "triplesum/model.hpp"

namespace triplesum {

struct SampledReport {
  std::size_t samples = 0;
  std::array<double, 4> bleu_mean{};
  std::array<double, 4> bleu_std{};
  double rouge_mean = 0.0;
  double rouge_std = 0.0;
  std::vector<MetricReport> runs;
};

// Token texts of a corpus summary, `<start>`/`<end>` included.
std::vector<std::string> summary_texts(const AlignedExample& e);

// For every evaluation input, a uniformly drawn training summary with its
// `<item>` and placeholders resolved against the input triples. Mean and
// population standard deviation over `samples` draws.
SampledReport random_baseline(std::span<const AlignedExample> train, std::span<const AlignedExample> eval,
                              const SurfaceLexicon& lexicon, std::size_t samples, std::uint64_t seed,
                              unsigned threads = 1);

struct KnBaselineResult {
  std::vector<std::string> tokens;  // top-1 unconditional output
  std::vector<Tokens> candidates;   // resolved per input
  MetricReport report;
  std::vector<std::size_t> fallback_orders;
};

// 5-gram Kneser-Ney over training summaries; one unconditional beam search,
// then per-input placeholder resolution.
KnBaselineResult kn_baseline(std::span<const AlignedExample> train, std::span<const AlignedExample> eval,
                             const SurfaceLexicon& lexicon, std::size_t order, const BeamConfig& beam,
                             unsigned threads = 1);

// Perplexity of held-out target sequences under an add-one unigram model of
// the training targets over the `vocab_size` ids (`<start>` and `<pad>`
// excluded). Serves as the random baseline's implied perplexity proxy.
double unigram_perplexity(std::span<const EncodedExample> train, std::span<const EncodedExample> eval,
                          std::size_t vocab_size);

}  // namespace triplesum
