#pragma once

// Hand-built records and independent reference implementations shared by
// the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "triplesum/beam_search.hpp"
#include "triplesum/corpus.hpp"

namespace fixtures {

using triplesum::AnnotatedSummary;
using triplesum::Annotation;
using triplesum::Article;
using triplesum::InstanceTypeMap;
using triplesum::ObjectKind;
using triplesum::Triple;

inline Triple entity_triple(std::string s, std::string p, std::string o) {
  return {std::move(s), std::move(p), std::move(o), ObjectKind::entity, {}};
}

// The Papa Roach record: DBpedia triples, the two-sentence summary with its
// entity annotations, instance types, and the in-vocabulary set under which
// the printed target sequences arise.
struct PapaRoach {
  Article article;
  InstanceTypeMap types;
  std::vector<std::string> in_vocab;
  std::vector<std::string> uri_tokens;
  std::vector<std::string> tuple_tokens;
};

inline PapaRoach papa_roach() {
  PapaRoach r;
  auto& t = r.article.triples;
  t.push_back(entity_triple("dbr:Papa_Roach", "dbo:bandMember", "dbr:Jacoby_Shaddix"));
  t.push_back(entity_triple("dbr:Papa_Roach", "dbo:bandMember", "dbr:Jerry_Horton"));
  t.push_back(entity_triple("dbr:Papa_Roach", "dbo:genre", "dbr:Hard_rock"));
  t.push_back(entity_triple("dbr:Papa_Roach", "dbo:hometown", "dbr:United_States"));
  t.push_back(entity_triple("dbr:Papa_Roach", "dbo:hometown", "dbr:Vacaville,_California"));
  t.push_back(entity_triple("dbr:Infest_(album)", "dbo:artist", "dbr:Papa_Roach"));
  t.push_back(entity_triple("dbr:Metamorphosis_(Papa_Roach_album)", "dbo:artist", "dbr:Papa_Roach"));

  AnnotatedSummary& s = r.article.summary;
  s.id = "Papa_Roach";
  s.main_entity = "dbr:Papa_Roach";
  s.sentences = {
      {"Papa", "Roach", "is", "an", "American", "rock", "band", "from", "Vacaville", ",", "California", "."},
      {"Formed", "in", "1993", ",", "their", "first", "major-label", "release", "was", "the", "triple-platinum",
       "album", "Infest", "(", "2000", ")", "."}};
  s.annotations = {
      {0, 0, 2, "dbr:Papa_Roach", "Papa Roach"},
      {0, 4, 5, "dbr:United_States", "American"},
      {0, 5, 6, "dbr:Rock_music", "rock"},
      {0, 8, 11, "dbr:Vacaville,_California", "Vacaville, California"},
      {1, 10, 11, "dbr:Multi-platinum", "triple-platinum"},
      {1, 12, 13, "dbr:Infest_(album)", "Infest"},
  };

  r.types.insert("dbr:Jacoby_Shaddix", "dbo:MusicalArtist");
  r.types.insert("dbr:Jerry_Horton", "dbo:MusicalArtist");
  r.types.insert("dbr:Hard_rock", "dbo:MusicGenre");
  r.types.insert("dbr:United_States", "dbo:Country");
  r.types.insert("dbr:Vacaville,_California", "dbo:City");
  r.types.insert("dbr:Infest_(album)", "dbo:Album");
  r.types.insert("dbr:Metamorphosis_(Papa_Roach_album)", "dbo:Album");
  r.types.insert("dbr:Multi-platinum", "dbr:RIAA_certification");

  r.in_vocab = {"dbr:United_States", "dbr:Rock_music", "is", "an", "band", "from", ".", "Formed", "in", ",",
                "their", "first", "major-label", "release", "was", "the", "album", "(", ")"};

  // As printed, with the placeholder's subject descriptor spelled __subj__.
  r.uri_tokens = {"<start>", "<item>", "is", "an", "dbr:United_States", "dbr:Rock_music", "band", "from",
                  "dbo:hometown__obj__dbo:City", ".", "Formed", "in", "<year>", ",", "their", "first",
                  "major-label", "release", "was", "the", "dbr:RIAA_certification", "album",
                  "dbo:artist__subj__dbo:Album", "(", "<year>", ")", ".", "<end>"};
  r.tuple_tokens = r.uri_tokens;
  r.tuple_tokens[4] = "(dbr:United_States, American)";
  r.tuple_tokens[5] = "(dbr:Rock_music, rock)";
  return r;
}

// Exhaustive enumeration of every sequence a beam search with unbounded
// width could return: each token sequence that ends in `end` within
// `max_length` steps, plus every `max_length`-token prefix without `end`.
// Ranked by log-probability, then lexicographically.
template <class Scorer>
std::vector<std::pair<std::vector<int>, double>> enumerate_sequences(Scorer& scorer,
                                                                     const triplesum::BeamConfig& cfg) {
  using State = typename Scorer::State;
  std::vector<std::pair<std::vector<int>, double>> out;
  std::vector<int> prefix;
  auto rec = [&](auto&& self, const State& state, int last, double logp) -> void {
    const State states[1] = {state};
    const int tokens[1] = {last};
    auto [next, rows] = scorer.advance(states, tokens);
    for (Eigen::Index v = 0; v < rows.cols(); ++v) {
      const int tok = static_cast<int>(v);
      if (tok == cfg.excluded_token) continue;
      const double lp = logp + rows(0, v);
      prefix.push_back(tok);
      if (tok == cfg.end_token || prefix.size() == cfg.max_length)
        out.emplace_back(prefix, lp);
      else
        self(self, next[0], tok, lp);
      prefix.pop_back();
    }
  };
  rec(rec, scorer.initial(), cfg.start_token, 0.0);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

// Corpus BLEU-n from first principles: per-sentence clipped counts via
// std::map n-gram tables, summed, then geometric mean and brevity penalty.
inline double reference_bleu(const std::vector<std::vector<std::string>>& cand,
                             const std::vector<std::vector<std::string>>& ref, int n) {
  std::vector<double> match(n, 0.0), total(n, 0.0);
  double c_len = 0.0, r_len = 0.0;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    c_len += static_cast<double>(cand[i].size());
    r_len += static_cast<double>(ref[i].size());
    for (int k = 1; k <= n; ++k) {
      std::map<std::vector<std::string>, int> rc, cc;
      for (std::size_t j = 0; j + k <= ref[i].size(); ++j)
        ++rc[std::vector<std::string>(ref[i].begin() + j, ref[i].begin() + j + k)];
      for (std::size_t j = 0; j + k <= cand[i].size(); ++j)
        ++cc[std::vector<std::string>(cand[i].begin() + j, cand[i].begin() + j + k)];
      for (const auto& [g, c] : cc) {
        total[k - 1] += c;
        auto it = rc.find(g);
        match[k - 1] += std::min(c, it == rc.end() ? 0 : it->second);
      }
    }
  }
  double log_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (match[k] == 0.0) return 0.0;
    log_sum += std::log(match[k] / total[k]);
  }
  const double bp = c_len >= r_len ? 1.0 : std::exp(1.0 - r_len / c_len);
  return 100.0 * bp * std::exp(log_sum / n);
}

}  // namespace fixtures
