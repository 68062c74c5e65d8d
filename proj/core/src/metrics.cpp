#include "triplesum/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "parallel.hpp"
#include "triplesum/error.hpp"

namespace triplesum {

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t i = 0; i < 4; ++i) {
    matches[i] += o.matches[i];
    totals[i] += o.totals[i];
  }
  candidate_length += o.candidate_length;
  reference_length += o.reference_length;
  return *this;
}

BleuStats bleu_stats(const Tokens& candidate, const Tokens& reference) {
  BleuStats s;
  s.candidate_length = candidate.size();
  s.reference_length = reference.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    if (candidate.size() < n) continue;
    std::map<std::vector<std::string>, std::size_t> ref_counts, cand_counts;
    for (std::size_t i = 0; i + n <= reference.size(); ++i)
      ++ref_counts[Tokens(reference.begin() + static_cast<long>(i), reference.begin() + static_cast<long>(i + n))];
    for (std::size_t i = 0; i + n <= candidate.size(); ++i)
      ++cand_counts[Tokens(candidate.begin() + static_cast<long>(i), candidate.begin() + static_cast<long>(i + n))];
    s.totals[n - 1] = candidate.size() - n + 1;
    for (const auto& [gram, c] : cand_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) s.matches[n - 1] += std::min(c, it->second);
    }
  }
  return s;
}

double bleu(const BleuStats& s, int n) {
  if (n < 1 || n > 4) throw DataError("BLEU order must lie in [1, 4], got " + std::to_string(n));
  if (s.candidate_length == 0) return 0.0;
  double log_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (s.matches[k] == 0 || s.totals[k] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.matches[k]) / static_cast<double>(s.totals[k]));
  }
  const double c = static_cast<double>(s.candidate_length);
  const double r = static_cast<double>(s.reference_length);
  const double log_bp = std::min(0.0, 1.0 - r / c);
  return 100.0 * std::exp(log_bp + log_sum / n);
}

namespace {

void check_pairs(std::span<const Tokens> candidates, std::span<const Tokens> references) {
  if (candidates.size() != references.size())
    throw DataError(std::to_string(candidates.size()) + " candidates for " + std::to_string(references.size()) +
                    " references");
}

BleuStats corpus_stats(std::span<const Tokens> candidates, std::span<const Tokens> references, unsigned threads) {
  std::vector<BleuStats> per(candidates.size());
  detail::parallel_for(candidates.size(), threads,
                       [&](std::size_t i) { per[i] = bleu_stats(candidates[i], references[i]); });
  BleuStats total;
  for (const auto& s : per) total += s;
  return total;
}

}  // namespace

double bleu(std::span<const Tokens> candidates, std::span<const Tokens> references, int n, unsigned threads) {
  check_pairs(candidates, references);
  return bleu(corpus_stats(candidates, references, threads), n);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeResult rouge_l(std::span<const Tokens> candidates, std::span<const Tokens> references, double beta,
                    unsigned threads) {
  check_pairs(candidates, references);
  std::vector<double> f(candidates.size(), -1.0);
  detail::parallel_for(candidates.size(), threads, [&](std::size_t i) {
    const Tokens& ref = references[i];
    const Tokens& cand = candidates[i];
    if (ref.empty()) return;
    const double l = static_cast<double>(lcs_length(cand, ref));
    if (l == 0.0) {
      f[i] = 0.0;
      return;
    }
    const double r = l / static_cast<double>(ref.size());
    const double p = l / static_cast<double>(cand.size());
    const double b2 = beta * beta;
    f[i] = (1.0 + b2) * r * p / (r + b2 * p);
  });
  RougeResult out;
  std::vector<double> kept;
  for (double v : f) {
    if (v < 0.0)
      ++out.skipped;
    else
      kept.push_back(v);
  }
  out.evaluated = kept.size();
  if (kept.empty()) return out;
  std::sort(kept.begin(), kept.end());  // summation order independent of pair order
  out.score = 100.0 * std::accumulate(kept.begin(), kept.end(), 0.0) / static_cast<double>(kept.size());
  return out;
}

double perplexity_from_nll(double total_nll, std::size_t tokens) {
  if (tokens == 0) throw DataError("perplexity over zero tokens");
  return std::exp(total_nll / static_cast<double>(tokens));
}

std::vector<CurvePoint> bleu_by_triple_count(std::span<const Tokens> candidates, std::span<const Tokens> references,
                                             std::span<const std::size_t> triple_counts) {
  check_pairs(candidates, references);
  if (triple_counts.size() != candidates.size()) throw DataError("triple counts do not align with candidates");
  std::map<std::size_t, std::pair<BleuStats, std::size_t>> groups;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& g = groups[triple_counts[i]];
    g.first += bleu_stats(candidates[i], references[i]);
    ++g.second;
  }
  std::vector<CurvePoint> out;
  for (const auto& [count, g] : groups) out.push_back({count, g.second, bleu(g.first, 4)});
  return out;
}

MetricReport score_corpus(std::span<const Tokens> candidates, std::span<const Tokens> references,
                          std::span<const std::size_t> triple_counts, double beta, unsigned threads) {
  check_pairs(candidates, references);
  MetricReport r;
  const BleuStats stats = corpus_stats(candidates, references, threads);
  for (int n = 1; n <= 4; ++n) r.bleu[static_cast<std::size_t>(n - 1)] = bleu(stats, n);
  const RougeResult rouge = rouge_l(candidates, references, beta, threads);
  r.rouge_l = rouge.score;
  r.rouge_skipped = rouge.skipped;
  r.evaluated = candidates.size();
  if (!triple_counts.empty()) r.curve = bleu_by_triple_count(candidates, references, triple_counts);
  return r;
}

std::string report_json(const MetricReport& r) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : r.curve) curve.push_back({{"triples", p.triples}, {"examples", p.examples}, {"bleu4", p.bleu4}});
  nlohmann::json j = {{"bleu1", r.bleu[0]}, {"bleu2", r.bleu[1]},  {"bleu3", r.bleu[2]},
                      {"bleu4", r.bleu[3]}, {"rouge_l", r.rouge_l}, {"evaluated", r.evaluated},
                      {"rouge_skipped", r.rouge_skipped}, {"bleu4_by_triple_count", curve}};
  if (r.perplexity > 0.0) j["perplexity"] = r.perplexity;
  return j.dump(2);
}

std::string report_table(const MetricReport& r) {
  std::string out;
  if (r.perplexity > 0.0) out += fmt::format("{:<12}{:>10.3f}\n", "perplexity", r.perplexity);
  for (int n = 0; n < 4; ++n) out += fmt::format("{:<12}{:>10.3f}\n", fmt::format("BLEU-{}", n + 1), r.bleu[n]);
  out += fmt::format("{:<12}{:>10.3f}\n", "ROUGE-L", r.rouge_l);
  out += fmt::format("{:<12}{:>10}\n", "examples", r.evaluated);
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "triples,bleu4\n";
  for (const auto& p : curve) out += fmt::format("{},{}\n", p.triples, p.bleu4);
  return out;
}

}  // namespace triplesum
