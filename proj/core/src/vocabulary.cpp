#include "triplesum/vocabulary.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "triplesum/error.hpp"
#include "triplesum/text.hpp"

namespace triplesum {

namespace {

constexpr std::string_view kMagic = "#triplesum-vocab";
constexpr std::string_view kVersion = "v1";

TokenRole role_from_string(std::string_view s) {
  for (auto r : {TokenRole::special, TokenRole::entity, TokenRole::predicate, TokenRole::type, TokenRole::literal,
                 TokenRole::word})
    if (to_string(r) == s) return r;
  throw DataError("unknown token role: " + std::string(s));
}

using Ranked = std::vector<std::pair<std::string, std::size_t>>;

Ranked rank(const std::unordered_map<std::string, std::size_t>& counts) {
  Ranked out(counts.begin(), counts.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

}  // namespace

std::string_view to_string(VocabSide side) { return side == VocabSide::source ? "source" : "target"; }

std::string_view to_string(TokenRole role) {
  switch (role) {
    case TokenRole::special: return "special";
    case TokenRole::entity: return "entity";
    case TokenRole::predicate: return "predicate";
    case TokenRole::type: return "type";
    case TokenRole::literal: return "literal";
    case TokenRole::word: return "word";
  }
  return "word";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Vocabulary::Vocabulary(VocabSide side) : side_(side) {
  for (auto s : kSpecialTokens) add(std::string(s), 0, TokenRole::special);
}

const std::string& Vocabulary::decode(long long index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= tokens_.size())
    throw DataError("vocabulary index " + std::to_string(index) + " out of range [0, " +
                    std::to_string(tokens_.size()) + ")");
  return tokens_[static_cast<std::size_t>(index)];
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::encode(std::string_view token) const {
  if (auto i = find(token)) return *i;
  return side_ == VocabSide::target ? kRareIndex : kUnkIndex;
}

int Vocabulary::add(std::string token, std::size_t count, TokenRole role) {
  if (token.empty() || token.find_first_of("\t\n\r") != std::string::npos)
    throw DataError("vocabulary token must be non-empty without tabs or newlines");
  const int idx = static_cast<int>(tokens_.size());
  if (!index_.emplace(token, idx).second) throw DataError("duplicate vocabulary token: " + token);
  tokens_.push_back(std::move(token));
  counts_.push_back(count);
  roles_.push_back(role);
  return idx;
}

std::string Vocabulary::serialize() const {
  std::ostringstream out;
  save(out);
  return out.str();
}

std::uint64_t Vocabulary::content_hash() const { return fnv1a64(serialize()); }

void Vocabulary::save(std::ostream& out) const {
  out << kMagic << '\t' << kVersion << '\t' << to_string(side_) << '\t';
  for (std::size_t i = 0; i < kSpecialTokens.size(); ++i) out << (i ? " " : "") << kSpecialTokens[i];
  out << '\n';
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i] << '\t' << counts_[i];
    if (side_ == VocabSide::source) out << '\t' << to_string(roles_[i]);
    out << '\n';
  }
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty vocabulary file");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string field;
    while (std::getline(hs, field, '\t')) header.push_back(field);
  }
  if (header.size() != 4 || header[0] != kMagic) throw DataError("not a vocabulary file");
  if (header[1] != kVersion) throw DataError("unsupported vocabulary version " + header[1]);
  VocabSide side;
  if (header[2] == "source")
    side = VocabSide::source;
  else if (header[2] == "target")
    side = VocabSide::target;
  else
    throw DataError("unknown vocabulary side " + header[2]);
  if (text::split_whitespace(header[3]) !=
      std::vector<std::string>(kSpecialTokens.begin(), kSpecialTokens.end()))
    throw DataError("vocabulary special-token list differs from this build");

  Vocabulary v(side);
  std::size_t lineno = 1, row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      const auto tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    const std::size_t expected = side == VocabSide::source ? 3 : 2;
    if (cols.size() != expected) throw DataError("vocabulary line " + std::to_string(lineno) + " malformed");
    std::size_t count = 0;
    try {
      count = std::stoull(cols[1]);
    } catch (const std::exception&) {
      throw DataError("vocabulary line " + std::to_string(lineno) + ": bad count");
    }
    const TokenRole role = side == VocabSide::source ? role_from_string(cols[2])
                                                     : (is_special_token(cols[0]) ? TokenRole::special : TokenRole::word);
    if (row < kSpecialTokens.size()) {
      if (cols[0] != kSpecialTokens[row]) throw DataError("vocabulary specials out of order");
      v.set_count(static_cast<int>(row), count);
    } else {
      v.add(cols[0], count, role);
    }
    ++row;
  }
  if (row < kSpecialTokens.size()) throw DataError("vocabulary file truncated");
  return v;
}

Vocabulary build_target_vocab(std::span<const AlignedExample> corpus, std::size_t max_size, std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> counts;
  std::array<std::size_t, kSpecialTokens.size()> special_counts{};
  for (const auto& e : corpus) {
    for (const auto& t : e.summary) {
      if (is_special_token(t.text)) {
        for (std::size_t i = 0; i < kSpecialTokens.size(); ++i)
          if (kSpecialTokens[i] == t.text) ++special_counts[i];
      } else {
        ++counts[t.text];
      }
    }
  }
  Vocabulary v(VocabSide::target);
  for (std::size_t i = 0; i < special_counts.size(); ++i) v.set_count(static_cast<int>(i), special_counts[i]);
  std::size_t kept = 0;
  for (const auto& [token, c] : rank(counts)) {
    if ((max_size && kept >= max_size) || c < min_count) break;
    v.add(token, c, TokenRole::word);
    ++kept;
  }
  return v;
}

Vocabulary build_source_vocab(std::span<const AlignedExample> corpus, std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> counts;
  std::unordered_map<std::string, TokenRole> roles;
  std::unordered_map<std::string, std::string> type_of;
  std::array<std::size_t, kSpecialTokens.size()> special_counts{};

  auto note = [&](const std::string& token, TokenRole role, const std::string& type) {
    if (is_special_token(token)) {
      for (std::size_t i = 0; i < kSpecialTokens.size(); ++i)
        if (kSpecialTokens[i] == token) ++special_counts[i];
      return;
    }
    ++counts[token];
    auto [it, inserted] = roles.emplace(token, role);
    if (!inserted && role == TokenRole::predicate) it->second = role;
    if (!type.empty() && type != kUnkToken) type_of.emplace(token, type);
  };
  for (const auto& e : corpus) {
    for (const auto& t : e.triples) {
      const bool subject_typed = t.subject != kItemToken;
      note(t.subject, TokenRole::entity, subject_typed ? t.type : std::string());
      note(t.predicate, TokenRole::predicate, {});
      const TokenRole obj_role = t.object_kind == ObjectKind::entity ? TokenRole::entity : TokenRole::literal;
      note(t.object, obj_role, subject_typed ? std::string() : t.type);
    }
  }

  Vocabulary v(VocabSide::source);
  for (std::size_t i = 0; i < special_counts.size(); ++i) v.set_count(static_cast<int>(i), special_counts[i]);

  std::unordered_map<std::string, std::size_t> kept;
  std::unordered_map<std::string, std::size_t> type_counts;
  for (const auto& [token, c] : counts) {
    if (c >= min_count) {
      kept.emplace(token, c);
    } else if (roles[token] != TokenRole::predicate) {
      if (auto it = type_of.find(token); it != type_of.end()) type_counts[it->second] += c;
    }
  }
  for (const auto& [type, c] : type_counts) {
    if (c < min_count) continue;
    if (auto it = kept.find(type); it != kept.end()) {
      it->second += c;
    } else {
      kept.emplace(type, c);
      roles.emplace(type, TokenRole::type);
    }
  }
  for (const auto& [token, c] : rank(kept)) {
    TokenRole role = roles.count(token) ? roles[token] : TokenRole::type;
    v.add(token, c, role);
  }
  return v;
}

int encode_source_token(const Vocabulary& source, std::string_view token, std::string_view type) {
  if (auto i = source.find(token)) return *i;
  if (type.empty() || type == kUnkToken) return kUnkIndex;
  if (auto i = source.find(type)) return *i;
  return kResourceIndex;
}

std::optional<EncodedTriple> encode_triple(const Vocabulary& source, const Triple& t) {
  const auto pred = source.find(t.predicate);
  if (!pred) return std::nullopt;
  const bool subject_typed = t.subject != kItemToken;
  EncodedTriple e;
  e.subject = encode_source_token(source, t.subject, subject_typed ? std::string_view(t.type) : std::string_view());
  e.predicate = *pred;
  e.object = encode_source_token(source, t.object, subject_typed ? std::string_view() : std::string_view(t.type));
  return e;
}

std::vector<EncodedTriple> encode_triples(const Vocabulary& source, std::span<const Triple> triples) {
  std::vector<EncodedTriple> out;
  for (const auto& t : triples)
    if (auto e = encode_triple(source, t)) out.push_back(*e);
  return out;
}

std::vector<int> encode_summary(const Vocabulary& target, std::span<const SummaryToken> tokens) {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(target.encode(t.text));
  return out;
}

}  // namespace triplesum
