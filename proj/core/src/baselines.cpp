#include "triplesum/baselines.hpp"

#include <cmath>
#include <random>

#include "triplesum/error.hpp"
#include "triplesum/generation.hpp"
#include "triplesum/kneser_ney.hpp"

namespace triplesum {

std::vector<std::string> summary_texts(const AlignedExample& e) {
  std::vector<std::string> out;
  out.reserve(e.summary.size());
  for (const auto& t : e.summary) out.push_back(t.text);
  return out;
}

namespace {

std::vector<std::size_t> triple_counts(std::span<const AlignedExample> eval) {
  std::vector<std::size_t> out;
  for (const auto& e : eval) out.push_back(e.triples.size());
  return out;
}

std::vector<Tokens> references(std::span<const AlignedExample> eval) {
  std::vector<Tokens> out;
  for (const auto& e : eval) out.push_back(e.reference);
  return out;
}

}  // namespace

SampledReport random_baseline(std::span<const AlignedExample> train, std::span<const AlignedExample> eval,
                              const SurfaceLexicon& lexicon, std::size_t samples, std::uint64_t seed,
                              unsigned threads) {
  if (train.empty()) throw DataError("random baseline needs a non-empty training set");
  if (samples == 0) throw DataError("random baseline needs at least one sample");
  std::vector<std::vector<std::string>> pool;
  for (const auto& e : train) pool.push_back(summary_texts(e));
  const auto refs = references(eval);
  const auto counts = triple_counts(eval);

  SampledReport out;
  out.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<Tokens> cands;
    for (const auto& e : eval) {
      const auto& drawn = pool[pick(rng)];
      const PostprocessContext ctx{e.triples, &lexicon, e.item_surface};
      cands.push_back(postprocess_tokens(drawn, ctx));
    }
    out.runs.push_back(score_corpus(cands, refs, counts, 1.2, threads));
  }
  const double n = static_cast<double>(samples);
  for (std::size_t k = 0; k < 4; ++k) {
    double mean = 0.0, sq = 0.0;
    for (const auto& r : out.runs) mean += r.bleu[k];
    mean /= n;
    for (const auto& r : out.runs) sq += (r.bleu[k] - mean) * (r.bleu[k] - mean);
    out.bleu_mean[k] = mean;
    out.bleu_std[k] = std::sqrt(sq / n);
  }
  double mean = 0.0, sq = 0.0;
  for (const auto& r : out.runs) mean += r.rouge_l;
  mean /= n;
  for (const auto& r : out.runs) sq += (r.rouge_l - mean) * (r.rouge_l - mean);
  out.rouge_mean = mean;
  out.rouge_std = std::sqrt(sq / n);
  return out;
}

KnBaselineResult kn_baseline(std::span<const AlignedExample> train, std::span<const AlignedExample> eval,
                             const SurfaceLexicon& lexicon, std::size_t order, const BeamConfig& beam,
                             unsigned threads) {
  if (train.empty()) throw DataError("Kneser-Ney baseline needs a non-empty training set");
  std::vector<std::vector<std::string>> sentences;
  for (const auto& e : train) sentences.push_back(summary_texts(e));
  const KneserNey lm(sentences, order);
  KnBaselineResult out;
  out.fallback_orders = lm.fallback_orders();
  const auto best = lm.generate(beam);
  if (!best.empty()) out.tokens = best.front();
  for (const auto& e : eval) {
    const PostprocessContext ctx{e.triples, &lexicon, e.item_surface};
    out.candidates.push_back(postprocess_tokens(out.tokens, ctx));
  }
  out.report = score_corpus(out.candidates, references(eval), triple_counts(eval), 1.2, threads);
  return out;
}

double unigram_perplexity(std::span<const EncodedExample> train, std::span<const EncodedExample> eval,
                          std::size_t vocab_size) {
  if (vocab_size <= 2) throw DataError("unigram proxy needs a vocabulary beyond <start> and <pad>");
  std::vector<double> counts(vocab_size, 0.0);
  double total = 0.0;
  for (const auto& e : train)
    for (std::size_t t = 1; t < e.tokens.size(); ++t) {
      counts.at(static_cast<std::size_t>(e.tokens[t])) += 1.0;
      total += 1.0;
    }
  const double support = static_cast<double>(vocab_size - 2);
  double nll = 0.0;
  std::size_t n = 0;
  for (const auto& e : eval)
    for (std::size_t t = 1; t < e.tokens.size(); ++t) {
      const auto w = static_cast<std::size_t>(e.tokens[t]);
      nll -= std::log((counts.at(w) + 1.0) / (total + support));
      ++n;
    }
  if (n == 0) throw DataError("unigram proxy over zero tokens");
  return std::exp(nll / static_cast<double>(n));
}

}  // namespace triplesum
