#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "triplesum/triple.hpp"

namespace triplesum {

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

// Entity mention over the half-open token range [start, end) of a sentence.
struct Annotation {
  std::size_t sentence = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string uri;
  std::string surface;
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct AnnotatedSummary {
  std::string id;
  std::string main_entity;
  std::vector<std::vector<std::string>> sentences;
  std::vector<Annotation> annotations;
  // Entity-linker settings, carried as provenance only.
  std::optional<double> confidence;
  std::optional<double> support;
};

// Throws DataError when an annotation leaves its sentence or two
// annotations overlap.
void validate_annotations(const AnnotatedSummary& s);

bool mentions_main_entity(const AnnotatedSummary& s);

// Two-column TSV lookups: entity -> instance type, entity -> gender.
class EntityLexicon {
 public:
  EntityLexicon() = default;
  explicit EntityLexicon(std::unordered_map<std::string, std::string> entries)
      : entries_(std::move(entries)) {}

  static EntityLexicon read_tsv(std::istream& in);

  void insert(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }
  const std::string* find(std::string_view key) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

// Lookups of absent entities resolve to `<unk>`.
class InstanceTypeMap {
 public:
  InstanceTypeMap() = default;
  explicit InstanceTypeMap(EntityLexicon lexicon) : lexicon_(std::move(lexicon)) {}

  static InstanceTypeMap read_tsv(std::istream& in) { return InstanceTypeMap(EntityLexicon::read_tsv(in)); }

  void insert(std::string uri, std::string type) { lexicon_.insert(std::move(uri), std::move(type)); }
  bool has(std::string_view uri) const { return lexicon_.find(uri) != nullptr; }
  std::string lookup(std::string_view uri) const;

 private:
  EntityLexicon lexicon_;
};

// ---------------------------------------------------------------------------
// Outputs
// ---------------------------------------------------------------------------

enum class TokenKind { word, entity_uri, surface_tuple, placeholder, instance_type, special };
enum class SummaryMode { uri, surface_form_tuple };

std::string_view to_string(TokenKind kind);
TokenKind token_kind_from_string(std::string_view name);
std::string_view to_string(SummaryMode mode);
SummaryMode summary_mode_from_string(std::string_view name);

struct SummaryToken {
  TokenKind kind = TokenKind::word;
  std::string text;
  std::optional<std::string> uri;
  std::optional<std::string> surface;
  friend bool operator==(const SummaryToken&, const SummaryToken&) = default;
};

enum class PlaceholderRole { subject, object };

struct Placeholder {
  std::string predicate;
  PlaceholderRole role = PlaceholderRole::object;
  std::string type;
};

inline constexpr std::string_view kSubjectMarker = "__subj__";
inline constexpr std::string_view kObjectMarker = "__obj__";

std::string make_placeholder(const Placeholder& p);
// Splits `pred__subj__Type` / `pred__obj__Type`; nullopt when the token does
// not follow that grammar.
std::optional<Placeholder> parse_placeholder(std::string_view token);

std::string make_tuple_token(std::string_view uri, std::string_view surface);
// `(dbr:X, surface)` -> {uri, surface}.
std::optional<std::pair<std::string, std::string>> parse_tuple_token(std::string_view token);

// Recovers the kind of a bare target-vocabulary string.
TokenKind classify_target_token(std::string_view token);

struct AlignedExample {
  std::string id;
  std::string main_entity;
  std::string item_surface;
  SummaryMode mode = SummaryMode::uri;
  std::vector<Triple> triples;
  std::vector<SummaryToken> summary;
  // Retained sentences as plain tokens (numbers normalized), the reference
  // text for scoring.
  std::vector<std::string> reference;
};

struct CorpusStats {
  std::size_t e_min = 0;
  double e_mean = 0.0;
  double e_std = 0.0;
  std::size_t articles = 0;
  std::size_t entities = 0;
  std::size_t predicates = 0;
  std::size_t words = 0;
  std::size_t annotated_entities = 0;

  // floor(E_min + 0.25 sigma) and floor(mean + 1.5 sigma).
  std::size_t lower_bound() const;
  std::size_t upper_bound() const;
};

// Population statistics of per-article triple counts.
CorpusStats stats_from_counts(std::span<const std::size_t> counts);

// ---------------------------------------------------------------------------
// Pipeline operations
// ---------------------------------------------------------------------------

// Keeps entity, number, date and year objects; drops textual literals.
std::vector<Triple> filter_triples(std::span<const Triple> triples);

// (s, p, "1970-04-29") -> (s, pMonth, 4), (s, pYear, <year>).
std::vector<Triple> encode_date_triple(const Triple& t);

// "1993" -> "<year>", "42" -> "0".
std::string normalize_numeric(std::string_view token, const YearRange& years = {});

// Applies normalize_numeric to number/year objects in place.
void normalize_triples(std::vector<Triple>& triples, const YearRange& years = {});

// Replaces `main` as subject/object of triples and in text annotations.
// Throws DataError when `main` occurs in neither.
void substitute_item(std::vector<Triple>& triples, AnnotatedSummary& summary, std::string_view main);
std::vector<Triple> substitute_item(std::span<const Triple> triples, std::string_view main);

std::vector<Triple> dedup_triples(std::span<const Triple> triples);

enum class BoundDecision { accept, trim, reject };

struct BoundResult {
  BoundDecision decision = BoundDecision::accept;
  std::vector<Triple> triples;
};

// Triple-count bounds: reject below the lower bound, keep the first
// `upper_bound()` triples above the upper bound.
BoundResult bound_triple_set(std::span<const Triple> triples, const CorpusStats& stats);

// Keeps the first `max_sentences` sentences and the annotations inside them.
// Throws DataError on an empty summary.
AnnotatedSummary truncate_summary(const AnnotatedSummary& s, std::size_t max_sentences = 2);

struct GenderConfig {
  std::string predicate = "foaf:gender";
};

// Appends (<item>, gender-predicate, value) when the main entity has a
// lexicon entry and no gender triple is present.
std::vector<Triple> augment_gender(std::span<const Triple> triples, std::string_view main_entity,
                                   const EntityLexicon& genders, const GenderConfig& cfg = {});

// Text-side rewriting against the in-vocabulary word/entity set. Entities
// outside `in_vocab` become property-type placeholders, instance-type
// tokens or `<unk>`; out-of-vocabulary words become `<rare>`; numerals
// become `0` / `<year>`. Output is wrapped in `<start>` ... `<end>`.
std::vector<SummaryToken> assign_placeholders(const AnnotatedSummary& s, std::span<const Triple> triples,
                                              const InstanceTypeMap& types,
                                              const std::unordered_set<std::string>& in_vocab,
                                              const YearRange& years = {});

// Entity tokens become `(uri, surface)` tuples; everything else passes through.
std::vector<SummaryToken> make_surface_tuples(std::span<const SummaryToken> tokens);

// Attaches instance types to each triple's non-<item> entity.
void attach_instance_types(std::vector<Triple>& triples, const InstanceTypeMap& types);

// ---------------------------------------------------------------------------
// Corpus construction
// ---------------------------------------------------------------------------

struct Article {
  AnnotatedSummary summary;
  std::vector<Triple> triples;
};

// Pairs each summary with the triples whose subject or object is its main
// entity, in triple-file order.
std::vector<Article> assemble_articles(std::span<const Triple> triples, std::vector<AnnotatedSummary> summaries);

struct ArticleSplit {
  std::vector<Article> train;
  std::vector<Article> valid;
  std::vector<Article> test;
};

// Seeded shuffle, then the first round(valid_fraction n) articles go to
// validation and the next round(test_fraction n) to test.
ArticleSplit split_articles(std::span<const Article> articles, double valid_fraction, double test_fraction,
                            std::uint64_t seed);

struct PipelineConfig {
  SummaryMode mode = SummaryMode::uri;
  YearRange years;
  std::size_t max_sentences = 2;
  std::size_t target_vocab_size = 30000;
  std::size_t target_min_count = 1;
  GenderConfig gender;
  // Reuse statistics and the in-vocabulary set of another split.
  std::optional<CorpusStats> fixed_stats;
  std::optional<std::vector<std::string>> fixed_in_vocab;
  unsigned threads = 1;
};

// Most frequent surface form per entity; ties resolve lexicographically.
class SurfaceLexicon {
 public:
  void add(const std::string& uri, const std::string& surface, std::size_t count = 1);
  // Surface of `uri`, or nullptr when never annotated.
  const std::string* find(std::string_view uri) const;
  // Lexicon surface, else a surface derived from the URI's local name.
  std::string resolve(std::string_view uri) const;

  std::vector<std::tuple<std::string, std::string, std::size_t>> entries() const;
  void write_tsv(std::ostream& out) const;
  static SurfaceLexicon read_tsv(std::istream& in);

 private:
  void refresh(const std::string& uri);
  std::map<std::string, std::map<std::string, std::size_t>> counts_;
  std::unordered_map<std::string, std::string> best_;
};

struct Exclusion {
  std::string article_id;
  std::string reason;
};

struct CorpusBuild {
  std::vector<AlignedExample> examples;
  CorpusStats stats;
  SurfaceLexicon lexicon;
  std::vector<std::string> in_vocab;  // frequency order
  std::vector<Exclusion> exclusions;
  std::size_t trimmed = 0;
  std::size_t dropped_malformed_dates = 0;

  std::map<std::string, std::size_t> exclusion_counts() const;
};

CorpusBuild build_corpus(std::span<const Article> articles, const InstanceTypeMap& types,
                         const EntityLexicon* genders, const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Serialization (JSON Lines)
// ---------------------------------------------------------------------------

std::vector<AnnotatedSummary> read_summaries_jsonl(std::istream& in);
void write_summary_jsonl(std::ostream& out, const AnnotatedSummary& s);

void write_example_jsonl(std::ostream& out, const AlignedExample& e);
std::vector<AlignedExample> read_examples_jsonl(std::istream& in);

// Stats plus exclusion report as one JSON document.
std::string corpus_report_json(const CorpusBuild& build);
CorpusStats read_stats_json(std::istream& in);
std::string stats_json(const CorpusStats& stats);

}  // namespace triplesum
