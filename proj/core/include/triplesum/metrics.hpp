#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace triplesum {

using Tokens = std::vector<std::string>;

// Clipped n-gram matches and candidate n-gram totals for orders 1..4, plus
// lengths, summed over a corpus.
struct BleuStats {
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  BleuStats& operator+=(const BleuStats& o);
};

BleuStats bleu_stats(const Tokens& candidate, const Tokens& reference);

// Corpus BLEU-n in [0, 100]: geometric mean of clipped precisions 1..n times
// exp(min(0, 1 - r / c)). No smoothing; any zero precision gives 0.
double bleu(const BleuStats& stats, int n);
double bleu(std::span<const Tokens> candidates, std::span<const Tokens> references, int n, unsigned threads = 1);

std::size_t lcs_length(const Tokens& a, const Tokens& b);

struct RougeResult {
  double score = 0.0;  // mean F x 100
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // pairs with an empty reference
};

// ROUGE-L F-measure (1 + b^2) R P / (R + b^2 P) averaged over pairs.
RougeResult rouge_l(std::span<const Tokens> candidates, std::span<const Tokens> references, double beta = 1.2,
                    unsigned threads = 1);

// exp(total_nll / tokens).
double perplexity_from_nll(double total_nll, std::size_t tokens);

struct CurvePoint {
  std::size_t triples = 0;
  std::size_t examples = 0;
  double bleu4 = 0.0;
};

// BLEU-4 per group of equal triple count, ascending; empty groups omitted.
std::vector<CurvePoint> bleu_by_triple_count(std::span<const Tokens> candidates, std::span<const Tokens> references,
                                             std::span<const std::size_t> triple_counts);

struct MetricReport {
  double perplexity = 0.0;  // 0 when not measured
  std::array<double, 4> bleu{};
  double rouge_l = 0.0;
  std::vector<CurvePoint> curve;
  std::size_t evaluated = 0;
  std::size_t rouge_skipped = 0;
};

MetricReport score_corpus(std::span<const Tokens> candidates, std::span<const Tokens> references,
                          std::span<const std::size_t> triple_counts, double beta = 1.2, unsigned threads = 1);

std::string report_json(const MetricReport& r);
std::string report_table(const MetricReport& r);
std::string curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace triplesum
