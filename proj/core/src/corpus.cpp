#include "triplesum/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "parallel.hpp"
#include "triplesum/error.hpp"
#include "triplesum/text.hpp"

namespace triplesum {

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

void validate_annotations(const AnnotatedSummary& s) {
  std::vector<const Annotation*> sorted;
  for (const auto& a : s.annotations) {
    if (a.sentence >= s.sentences.size() || a.start >= a.end || a.end > s.sentences[a.sentence].size())
      throw DataError("annotation of " + a.uri + " outside sentence bounds in " + s.id);
    sorted.push_back(&a);
  }
  std::sort(sorted.begin(), sorted.end(), [](const Annotation* x, const Annotation* y) {
    return std::tie(x->sentence, x->start) < std::tie(y->sentence, y->start);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->sentence == sorted[i - 1]->sentence && sorted[i]->start < sorted[i - 1]->end)
      throw DataError("overlapping annotations in " + s.id);
  }
}

bool mentions_main_entity(const AnnotatedSummary& s) {
  return std::any_of(s.annotations.begin(), s.annotations.end(),
                     [&](const Annotation& a) { return a.uri == s.main_entity; });
}

EntityLexicon EntityLexicon::read_tsv(std::istream& in) {
  EntityLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      throw DataError("lexicon line " + std::to_string(lineno) + " is not two tab-separated columns");
    lex.insert(compact_iri(line.substr(0, tab)), compact_iri(line.substr(tab + 1)));
  }
  return lex;
}

const std::string* EntityLexicon::find(std::string_view key) const {
  auto it = entries_.find(std::string(key));
  return it == entries_.end() ? nullptr : &it->second;
}

std::string InstanceTypeMap::lookup(std::string_view uri) const {
  const std::string* t = lexicon_.find(uri);
  return t ? *t : std::string(kUnkToken);
}

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::word: return "word";
    case TokenKind::entity_uri: return "entity_uri";
    case TokenKind::surface_tuple: return "surface_tuple";
    case TokenKind::placeholder: return "placeholder";
    case TokenKind::instance_type: return "instance_type";
    case TokenKind::special: return "special";
  }
  return "word";
}

TokenKind token_kind_from_string(std::string_view name) {
  for (auto k : {TokenKind::word, TokenKind::entity_uri, TokenKind::surface_tuple, TokenKind::placeholder,
                 TokenKind::instance_type, TokenKind::special})
    if (to_string(k) == name) return k;
  throw DataError("unknown token kind: " + std::string(name));
}

std::string_view to_string(SummaryMode mode) {
  return mode == SummaryMode::uri ? "uri" : "tuples";
}

SummaryMode summary_mode_from_string(std::string_view name) {
  if (name == "uri" || name == "uris") return SummaryMode::uri;
  if (name == "tuples" || name == "tuple" || name == "surface_form_tuple") return SummaryMode::surface_form_tuple;
  throw DataError("unknown summary mode: " + std::string(name));
}

std::string make_placeholder(const Placeholder& p) {
  return p.predicate + std::string(p.role == PlaceholderRole::subject ? kSubjectMarker : kObjectMarker) + p.type;
}

std::optional<Placeholder> parse_placeholder(std::string_view token) {
  const auto subj = token.find(kSubjectMarker);
  const auto obj = token.find(kObjectMarker);
  if ((subj == std::string_view::npos) == (obj == std::string_view::npos)) return std::nullopt;
  const bool is_subject = subj != std::string_view::npos;
  const auto at = is_subject ? subj : obj;
  const auto marker = is_subject ? kSubjectMarker : kObjectMarker;
  Placeholder p;
  p.predicate = std::string(token.substr(0, at));
  p.type = std::string(token.substr(at + marker.size()));
  p.role = is_subject ? PlaceholderRole::subject : PlaceholderRole::object;
  if (p.predicate.empty() || p.type.empty()) return std::nullopt;
  if (p.type.find(kSubjectMarker) != std::string::npos || p.type.find(kObjectMarker) != std::string::npos)
    return std::nullopt;
  return p;
}

std::string make_tuple_token(std::string_view uri, std::string_view surface) {
  return "(" + std::string(uri) + ", " + std::string(surface) + ")";
}

std::optional<std::pair<std::string, std::string>> parse_tuple_token(std::string_view token) {
  if (token.size() < 5 || token.front() != '(' || token.back() != ')') return std::nullopt;
  const auto inner = token.substr(1, token.size() - 2);
  const auto sep = inner.find(", ");
  if (sep == std::string_view::npos || sep == 0 || sep + 2 >= inner.size()) return std::nullopt;
  return std::make_pair(std::string(inner.substr(0, sep)), std::string(inner.substr(sep + 2)));
}

TokenKind classify_target_token(std::string_view token) {
  if (is_special_token(token)) return TokenKind::special;
  if (parse_placeholder(token)) return TokenKind::placeholder;
  if (parse_tuple_token(token)) return TokenKind::surface_tuple;
  const auto colon = token.find(':');
  if (colon != std::string_view::npos && colon > 0 && colon + 1 < token.size() &&
      std::isalpha(static_cast<unsigned char>(token.front()))) {
    const auto prefix = token.substr(0, colon);
    const bool prefix_ok = std::all_of(prefix.begin(), prefix.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
    if (prefix_ok && token.find(' ') == std::string_view::npos) return TokenKind::entity_uri;
  }
  if (token.size() > 2 && token.front() == '<' && token.back() == '>') return TokenKind::entity_uri;
  return TokenKind::word;
}

// ---------------------------------------------------------------------------
// Stats
// ---------------------------------------------------------------------------

std::size_t CorpusStats::lower_bound() const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(e_min) + 0.25 * e_std));
}

std::size_t CorpusStats::upper_bound() const {
  return static_cast<std::size_t>(std::floor(e_mean + 1.5 * e_std));
}

CorpusStats stats_from_counts(std::span<const std::size_t> counts) {
  CorpusStats st;
  if (counts.empty()) return st;
  st.e_min = *std::min_element(counts.begin(), counts.end());
  const double n = static_cast<double>(counts.size());
  double sum = 0.0;
  for (auto c : counts) sum += static_cast<double>(c);
  st.e_mean = sum / n;
  double sq = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - st.e_mean;
    sq += d * d;
  }
  st.e_std = std::sqrt(sq / n);
  return st;
}

// ---------------------------------------------------------------------------
// Triple-side operations
// ---------------------------------------------------------------------------

std::vector<Triple> filter_triples(std::span<const Triple> triples) {
  std::vector<Triple> out;
  for (const auto& t : triples)
    if (t.object_kind != ObjectKind::other_literal) out.push_back(t);
  return out;
}

std::vector<Triple> encode_date_triple(const Triple& t) {
  const auto date = parse_date(t.object);
  if (!date || date->month < 1 || date->month > 12)
    throw DataError("malformed date literal \"" + t.object + "\" for " + t.subject + " " + t.predicate);
  Triple month{t.subject, t.predicate + "Month", std::to_string(date->month), ObjectKind::month, t.type};
  Triple year{t.subject, t.predicate + "Year", std::string(kYearToken), ObjectKind::year, t.type};
  return {std::move(month), std::move(year)};
}

std::string normalize_numeric(std::string_view token, const YearRange& years) {
  if (token == kYearToken || token == kZeroToken) return std::string(token);
  if (!text::is_numeral(token)) return std::string(token);
  if (token.size() == 4 && std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const int value = std::stoi(std::string(token));
    if (value >= years.min && value <= years.max) return std::string(kYearToken);
  }
  return std::string(kZeroToken);
}

void normalize_triples(std::vector<Triple>& triples, const YearRange& years) {
  for (auto& t : triples) {
    if (t.object_kind != ObjectKind::number && t.object_kind != ObjectKind::year) continue;
    t.object = normalize_numeric(t.object, years);
    t.object_kind = t.object == kYearToken ? ObjectKind::year : ObjectKind::number;
  }
}

namespace {

bool replace_main(std::vector<Triple>& triples, std::string_view main) {
  bool found = false;
  for (auto& t : triples) {
    if (t.subject == main) {
      t.subject = std::string(kItemToken);
      found = true;
    }
    if (t.object_kind == ObjectKind::entity && t.object == main) {
      t.object = std::string(kItemToken);
      found = true;
    }
  }
  return found;
}

}  // namespace

void substitute_item(std::vector<Triple>& triples, AnnotatedSummary& summary, std::string_view main) {
  bool found = replace_main(triples, main);
  for (auto& a : summary.annotations) {
    if (a.uri == main) {
      a.uri = std::string(kItemToken);
      found = true;
    }
  }
  if (!found) throw DataError("main entity " + std::string(main) + " absent from triples and text");
}

std::vector<Triple> substitute_item(std::span<const Triple> triples, std::string_view main) {
  std::vector<Triple> out(triples.begin(), triples.end());
  if (!replace_main(out, main)) throw DataError("main entity " + std::string(main) + " absent from triples");
  return out;
}

std::vector<Triple> dedup_triples(std::span<const Triple> triples) {
  std::vector<Triple> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& t : triples) {
    if (seen.emplace(t.subject, t.predicate, t.object).second) out.push_back(t);
  }
  return out;
}

BoundResult bound_triple_set(std::span<const Triple> triples, const CorpusStats& stats) {
  BoundResult r;
  if (triples.size() < stats.lower_bound()) {
    r.decision = BoundDecision::reject;
    return r;
  }
  const std::size_t upper = stats.upper_bound();
  if (triples.size() <= upper) {
    r.triples.assign(triples.begin(), triples.end());
    return r;
  }
  r.decision = BoundDecision::trim;
  r.triples = dedup_triples(triples);
  if (r.triples.size() > upper) r.triples.resize(upper);
  return r;
}

AnnotatedSummary truncate_summary(const AnnotatedSummary& s, std::size_t max_sentences) {
  if (s.sentences.empty()) throw DataError("empty summary: " + s.id);
  AnnotatedSummary out = s;
  if (out.sentences.size() > max_sentences) out.sentences.resize(max_sentences);
  std::erase_if(out.annotations, [&](const Annotation& a) { return a.sentence >= out.sentences.size(); });
  return out;
}

std::vector<Triple> augment_gender(std::span<const Triple> triples, std::string_view main_entity,
                                   const EntityLexicon& genders, const GenderConfig& cfg) {
  std::vector<Triple> out(triples.begin(), triples.end());
  const std::string* gender = genders.find(main_entity);
  if (!gender) return out;
  const bool present = std::any_of(out.begin(), out.end(), [&](const Triple& t) { return t.predicate == cfg.predicate; });
  if (!present)
    out.push_back(Triple{std::string(kItemToken), cfg.predicate, *gender, ObjectKind::other_literal, {}});
  return out;
}

void attach_instance_types(std::vector<Triple>& triples, const InstanceTypeMap& types) {
  for (auto& t : triples) {
    std::string_view entity;
    if (t.subject != kItemToken)
      entity = t.subject;
    else if (t.object_kind == ObjectKind::entity && t.object != kItemToken)
      entity = t.object;
    t.type = (!entity.empty() && types.has(entity)) ? types.lookup(entity) : std::string();
  }
}

// ---------------------------------------------------------------------------
// Text-side rewriting
// ---------------------------------------------------------------------------

std::vector<SummaryToken> assign_placeholders(const AnnotatedSummary& s, std::span<const Triple> triples,
                                              const InstanceTypeMap& types,
                                              const std::unordered_set<std::string>& in_vocab,
                                              const YearRange& years) {
  std::vector<SummaryToken> out;
  out.push_back({TokenKind::special, std::string(kStartToken), {}, {}});

  for (std::size_t si = 0; si < s.sentences.size(); ++si) {
    const auto& sentence = s.sentences[si];
    std::vector<const Annotation*> starts(sentence.size(), nullptr);
    for (const auto& a : s.annotations)
      if (a.sentence == si && a.start < sentence.size()) starts[a.start] = &a;

    for (std::size_t ti = 0; ti < sentence.size();) {
      if (const Annotation* a = starts[ti]) {
        ti = a->end;
        if (a->uri == kItemToken) {
          out.push_back({TokenKind::special, std::string(kItemToken), {}, {}});
          continue;
        }
        if (in_vocab.contains(a->uri)) {
          out.push_back({TokenKind::entity_uri, a->uri, a->uri, a->surface});
          continue;
        }
        // Rare entity: first triple in list order naming it wins.
        const Triple* match = nullptr;
        PlaceholderRole role = PlaceholderRole::object;
        for (const auto& t : triples) {
          if (t.subject == a->uri) {
            match = &t;
            role = PlaceholderRole::subject;
            break;
          }
          if (t.object_kind == ObjectKind::entity && t.object == a->uri) {
            match = &t;
            role = PlaceholderRole::object;
            break;
          }
        }
        if (match) {
          Placeholder p{match->predicate, role, types.lookup(a->uri)};
          out.push_back({TokenKind::placeholder, make_placeholder(p), a->uri, a->surface});
        } else {
          out.push_back({TokenKind::instance_type, types.lookup(a->uri), a->uri, a->surface});
        }
        continue;
      }
      const std::string& word = sentence[ti++];
      if (text::is_numeral(word)) {
        out.push_back({TokenKind::special, normalize_numeric(word, years), {}, {}});
      } else if (in_vocab.contains(word)) {
        out.push_back({TokenKind::word, word, {}, {}});
      } else {
        out.push_back({TokenKind::special, std::string(kRareToken), {}, {}});
      }
    }
  }
  out.push_back({TokenKind::special, std::string(kEndToken), {}, {}});
  return out;
}

std::vector<SummaryToken> make_surface_tuples(std::span<const SummaryToken> tokens) {
  std::vector<SummaryToken> out(tokens.begin(), tokens.end());
  for (auto& t : out) {
    if (t.kind == TokenKind::entity_uri && t.uri && t.surface) {
      t.kind = TokenKind::surface_tuple;
      t.text = make_tuple_token(*t.uri, *t.surface);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus construction
// ---------------------------------------------------------------------------

std::vector<Article> assemble_articles(std::span<const Triple> triples, std::vector<AnnotatedSummary> summaries) {
  std::unordered_map<std::string, std::vector<std::size_t>> by_entity;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    by_entity[triples[i].subject].push_back(i);
    if (triples[i].object_kind == ObjectKind::entity && triples[i].object != triples[i].subject)
      by_entity[triples[i].object].push_back(i);
  }
  std::vector<Article> out;
  out.reserve(summaries.size());
  for (auto& s : summaries) {
    Article a;
    if (auto it = by_entity.find(s.main_entity); it != by_entity.end()) {
      auto idx = it->second;
      std::sort(idx.begin(), idx.end());
      for (auto i : idx) a.triples.push_back(triples[i]);
    }
    a.summary = std::move(s);
    out.push_back(std::move(a));
  }
  return out;
}

ArticleSplit split_articles(std::span<const Article> articles, double valid_fraction, double test_fraction,
                            std::uint64_t seed) {
  if (valid_fraction < 0.0 || test_fraction < 0.0 || valid_fraction + test_fraction >= 1.0)
    throw DataError("split fractions must be non-negative and sum to less than 1");
  std::vector<std::size_t> order(articles.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(articles.size());
  const auto n_valid = static_cast<std::size_t>(std::llround(valid_fraction * n));
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * n));
  ArticleSplit out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dst = i < n_valid ? out.valid : i < n_valid + n_test ? out.test : out.train;
    dst.push_back(articles[order[i]]);
  }
  return out;
}

void SurfaceLexicon::add(const std::string& uri, const std::string& surface, std::size_t count) {
  counts_[uri][surface] += count;
  refresh(uri);
}

void SurfaceLexicon::refresh(const std::string& uri) {
  const auto& forms = counts_.at(uri);
  const std::string* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [surface, c] : forms) {  // std::map: lexicographic order
    if (c > best_count) {
      best = &surface;
      best_count = c;
    }
  }
  best_[uri] = *best;
}

const std::string* SurfaceLexicon::find(std::string_view uri) const {
  auto it = best_.find(std::string(uri));
  return it == best_.end() ? nullptr : &it->second;
}

std::string SurfaceLexicon::resolve(std::string_view uri) const {
  if (const std::string* s = find(uri)) return *s;
  return text::surface_from_uri(uri);
}

std::vector<std::tuple<std::string, std::string, std::size_t>> SurfaceLexicon::entries() const {
  std::vector<std::tuple<std::string, std::string, std::size_t>> out;
  for (const auto& [uri, forms] : counts_) {
    const auto& best = best_.at(uri);
    out.emplace_back(uri, best, forms.at(best));
  }
  return out;
}

void SurfaceLexicon::write_tsv(std::ostream& out) const {
  for (const auto& [uri, forms] : counts_)
    for (const auto& [surface, c] : forms) out << uri << '\t' << surface << '\t' << c << '\n';
}

SurfaceLexicon SurfaceLexicon::read_tsv(std::istream& in) {
  SurfaceLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? std::string::npos : line.find('\t', a + 1);
    if (b == std::string::npos) throw DataError("surface lexicon line " + std::to_string(lineno) + " malformed");
    lex.add(line.substr(0, a), line.substr(a + 1, b - a - 1), std::stoull(line.substr(b + 1)));
  }
  return lex;
}

std::map<std::string, std::size_t> CorpusBuild::exclusion_counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& e : exclusions) ++out[e.reason];
  return out;
}

namespace {

struct Prepared {
  std::optional<std::string> excluded;
  AnnotatedSummary summary;  // after <item> substitution
  std::vector<Triple> triples;
  std::string item_surface;
  std::size_t malformed_dates = 0;
};

std::string most_frequent_main_surface(const AnnotatedSummary& s) {
  std::vector<std::pair<std::string, std::size_t>> seen;  // first-occurrence order
  for (const auto& a : s.annotations) {
    if (a.uri != s.main_entity) continue;
    auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& p) { return p.first == a.surface; });
    if (it == seen.end())
      seen.emplace_back(a.surface, 1);
    else
      ++it->second;
  }
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [surface, c] : seen) {
    if (c > best_count) {
      best = surface;
      best_count = c;
    }
  }
  return best;
}

Prepared prepare_article(const Article& article, const EntityLexicon* genders, const PipelineConfig& cfg) {
  Prepared p;
  p.summary = article.summary;
  try {
    validate_annotations(p.summary);
  } catch (const DataError&) {
    p.excluded = "malformed_annotation";
    return p;
  }
  if (p.summary.sentences.empty()) {
    p.excluded = "empty_summary";
    return p;
  }
  if (!mentions_main_entity(p.summary)) {
    p.excluded = "main_not_annotated";
    return p;
  }

  std::vector<Triple> triples;
  for (auto& t : filter_triples(article.triples)) {
    if (t.object_kind != ObjectKind::date) {
      triples.push_back(std::move(t));
      continue;
    }
    try {
      for (auto& e : encode_date_triple(t)) triples.push_back(std::move(e));
    } catch (const DataError&) {
      ++p.malformed_dates;
    }
  }
  normalize_triples(triples, cfg.years);
  p.item_surface = most_frequent_main_surface(p.summary);
  try {
    substitute_item(triples, p.summary, p.summary.main_entity);
  } catch (const DataError&) {
    p.excluded = "main_absent";
    return p;
  }
  if (genders) triples = augment_gender(triples, p.summary.main_entity, *genders, cfg.gender);
  p.triples = dedup_triples(triples);
  if (p.triples.empty()) p.excluded = "no_triples";
  return p;
}

std::vector<std::string> select_in_vocab(const std::vector<const AnnotatedSummary*>& summaries,
                                         const PipelineConfig& cfg) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const AnnotatedSummary* s : summaries) {
    for (std::size_t si = 0; si < s->sentences.size(); ++si) {
      const auto& sentence = s->sentences[si];
      std::vector<bool> covered(sentence.size(), false);
      for (const auto& a : s->annotations) {
        if (a.sentence != si) continue;
        for (std::size_t i = a.start; i < a.end && i < sentence.size(); ++i) covered[i] = true;
        if (a.uri != kItemToken) ++counts[a.uri];
      }
      for (std::size_t i = 0; i < sentence.size(); ++i) {
        if (covered[i] || text::is_numeral(sentence[i]) || is_special_token(sentence[i])) continue;
        ++counts[sentence[i]];
      }
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> out;
  for (const auto& [token, c] : ranked) {
    if (out.size() >= cfg.target_vocab_size || c < cfg.target_min_count) break;
    out.push_back(token);
  }
  return out;
}

}  // namespace

CorpusBuild build_corpus(std::span<const Article> articles, const InstanceTypeMap& types,
                         const EntityLexicon* genders, const PipelineConfig& cfg) {
  CorpusBuild build;

  std::vector<Prepared> prepared(articles.size());
  detail::parallel_for(articles.size(), cfg.threads,
                       [&](std::size_t i) { prepared[i] = prepare_article(articles[i], genders, cfg); });

  std::vector<std::size_t> counts;
  for (const auto& p : prepared) {
    build.dropped_malformed_dates += p.malformed_dates;
    if (!p.excluded) counts.push_back(p.triples.size());
  }
  const CorpusStats computed = stats_from_counts(counts);
  if (cfg.fixed_stats) {
    build.stats.e_min = cfg.fixed_stats->e_min;
    build.stats.e_mean = cfg.fixed_stats->e_mean;
    build.stats.e_std = cfg.fixed_stats->e_std;
  } else {
    build.stats.e_min = computed.e_min;
    build.stats.e_mean = computed.e_mean;
    build.stats.e_std = computed.e_std;
  }

  // Bounding and truncation, serial in input order.
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    auto& p = prepared[i];
    const std::string& id = articles[i].summary.id.empty() ? articles[i].summary.main_entity : articles[i].summary.id;
    if (p.excluded) {
      build.exclusions.push_back({id, *p.excluded});
      continue;
    }
    auto bounded = bound_triple_set(p.triples, build.stats);
    if (bounded.decision == BoundDecision::reject) {
      build.exclusions.push_back({id, "below_lower_bound"});
      continue;
    }
    if (bounded.decision == BoundDecision::trim) ++build.trimmed;
    p.triples = std::move(bounded.triples);
    p.summary = truncate_summary(p.summary, cfg.max_sentences);
    kept.push_back(i);
  }

  for (auto i : kept)
    for (const auto& a : articles[i].summary.annotations) build.lexicon.add(a.uri, a.surface);

  if (cfg.fixed_in_vocab) {
    build.in_vocab = *cfg.fixed_in_vocab;
  } else {
    std::vector<const AnnotatedSummary*> retained;
    for (auto i : kept) retained.push_back(&prepared[i].summary);
    build.in_vocab = select_in_vocab(retained, cfg);
  }
  const std::unordered_set<std::string> in_vocab(build.in_vocab.begin(), build.in_vocab.end());

  build.examples.resize(kept.size());
  detail::parallel_for(kept.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t i = kept[k];
    const auto& p = prepared[i];
    AlignedExample& e = build.examples[k];
    e.id = articles[i].summary.id.empty() ? articles[i].summary.main_entity : articles[i].summary.id;
    e.main_entity = articles[i].summary.main_entity;
    e.item_surface = p.item_surface;
    e.mode = cfg.mode;
    e.triples = p.triples;
    attach_instance_types(e.triples, types);
    e.summary = assign_placeholders(p.summary, p.triples, types, in_vocab, cfg.years);
    if (cfg.mode == SummaryMode::surface_form_tuple) e.summary = make_surface_tuples(e.summary);
    for (const auto& sentence : p.summary.sentences)
      for (const auto& tok : sentence)
        e.reference.push_back(text::is_numeral(tok) ? normalize_numeric(tok, cfg.years) : tok);
  });

  std::set<std::string> entities, predicates, words, annotated;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    for (const auto& t : build.examples[k].triples) {
      predicates.insert(t.predicate);
      if (t.subject != kItemToken) entities.insert(t.subject);
      if (t.object_kind == ObjectKind::entity && t.object != kItemToken) entities.insert(t.object);
    }
    for (const auto& tok : build.examples[k].summary)
      if (tok.kind == TokenKind::word) words.insert(tok.text);
    for (const auto& a : prepared[kept[k]].summary.annotations)
      if (a.uri != kItemToken) annotated.insert(a.uri);
  }
  build.stats.articles = kept.size();
  build.stats.entities = entities.size();
  build.stats.predicates = predicates.size();
  build.stats.words = words.size();
  build.stats.annotated_entities = annotated.size();
  return build;
}

}  // namespace triplesum
