#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace triplesum::text {

// Whitespace-plus-punctuation tokenizer used for synthetic corpora. Real
// corpora are expected to arrive pre-tokenized.
std::vector<std::string> tokenize(std::string_view raw);

// Splits a token stream into sentences after each `.`, `!` or `?` token.
std::vector<std::vector<std::string>> split_sentences(const std::vector<std::string>& tokens);

// Joins tokens with single spaces, with no space before `.` `,` `)` `;` `:`
// and none after `(`.
std::string detokenize(const std::vector<std::string>& tokens);

// Splits on runs of ASCII whitespace.
std::vector<std::string> split_whitespace(std::string_view s);

bool is_numeral(std::string_view token);

// `dbr:Open_All_Hours` -> "Open All Hours"; `dbr:Infest_(album)` -> "Infest".
std::string surface_from_uri(std::string_view uri);

}  // namespace triplesum::text
