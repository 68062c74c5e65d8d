#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "triplesum/corpus.hpp"

namespace triplesum {

enum class VocabSide { source, target };

// Source-side role of a token, stored so that embedding inspection can skip
// predicates and literals.
enum class TokenRole { special, entity, predicate, type, literal, word };

std::string_view to_string(VocabSide side);
std::string_view to_string(TokenRole role);

class Vocabulary {
 public:
  // Specials only, at indices 0..8.
  explicit Vocabulary(VocabSide side = VocabSide::target);

  VocabSide side() const { return side_; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Throws DataError when out of range.
  const std::string& decode(long long index) const;
  std::optional<int> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  // Unknown target tokens map to `<rare>`, unknown source tokens to `<unk>`.
  // Source entities should go through encode_source_token for the full
  // fallback chain.
  int encode(std::string_view token) const;

  std::size_t count(int index) const { return counts_.at(static_cast<std::size_t>(index)); }
  TokenRole role(int index) const { return roles_.at(static_cast<std::size_t>(index)); }

  // Appends a token; throws DataError on duplicates or on tabs/newlines.
  int add(std::string token, std::size_t count, TokenRole role);
  void set_count(int index, std::size_t count) { counts_.at(static_cast<std::size_t>(index)) = count; }

  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);
  std::string serialize() const;
  // FNV-1a 64 of serialize().
  std::uint64_t content_hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.side_ == b.side_ && a.tokens_ == b.tokens_ && a.counts_ == b.counts_ && a.roles_ == b.roles_;
  }

 private:
  VocabSide side_;
  std::vector<std::string> tokens_;
  std::vector<std::size_t> counts_;
  std::vector<TokenRole> roles_;
  std::unordered_map<std::string, int> index_;
};

std::uint64_t fnv1a64(std::string_view bytes);

// Specials, then up to `max_size` non-special summary tokens with count >=
// `min_count`, by count descending and lexicographically on ties.
// max_size == 0 keeps every qualifying token.
Vocabulary build_target_vocab(std::span<const AlignedExample> corpus, std::size_t max_size,
                              std::size_t min_count = 1);

// Shared subject/predicate/object dictionary. Entities and literals below
// `min_count` pass their count to their instance type, which enters the
// vocabulary when that total reaches `min_count`.
Vocabulary build_source_vocab(std::span<const AlignedExample> corpus, std::size_t min_count = 20);

struct EncodedTriple {
  int subject = 0;
  int predicate = 0;
  int object = 0;
  friend bool operator==(const EncodedTriple&, const EncodedTriple&) = default;
};

// Token itself, else its instance type, else `<resource>` when typed, else
// `<unk>`.
int encode_source_token(const Vocabulary& source, std::string_view token, std::string_view type);

// nullopt when the predicate is out of vocabulary (the triple is discarded).
std::optional<EncodedTriple> encode_triple(const Vocabulary& source, const Triple& t);
std::vector<EncodedTriple> encode_triples(const Vocabulary& source, std::span<const Triple> triples);

std::vector<int> encode_summary(const Vocabulary& target, std::span<const SummaryToken> tokens);

}  // namespace triplesum
