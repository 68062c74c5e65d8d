#include "triplesum/text.hpp"

#include <cctype>

namespace triplesum::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_split_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '(': case ')': case '"': case '[': case ']':
      return true;
    default:
      return false;
  }
}

bool no_space_before(std::string_view t) {
  return t == "." || t == "," || t == ")" || t == ";" || t == ":" || t == "!" || t == "?";
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (is_space(c)) {
      flush();
    } else if (is_split_punct(c)) {
      // Keep decimal points and thousands separators inside numerals.
      const bool inside_number = (c == '.' || c == ',') && !cur.empty() &&
                                 std::isdigit(static_cast<unsigned char>(cur.back())) && i + 1 < raw.size() &&
                                 std::isdigit(static_cast<unsigned char>(raw[i + 1]));
      if (inside_number) {
        cur.push_back(c);
      } else {
        flush();
        out.emplace_back(1, c);
      }
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

std::vector<std::vector<std::string>> split_sentences(const std::vector<std::string>& tokens) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> cur;
  for (const auto& t : tokens) {
    cur.push_back(t);
    if (t == "." || t == "!" || t == "?") {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  bool suppress_next = true;
  for (const auto& t : tokens) {
    if (t.empty()) continue;
    if (!suppress_next && !no_space_before(t)) out.push_back(' ');
    out += t;
    suppress_next = (t == "(");
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_numeral(std::string_view token) {
  if (token.empty()) return false;
  bool digit_seen = false;
  for (std::size_t i = 0; i < token.size(); ++i) {
    const char c = token[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit_seen = true;
    } else if ((c == '.' || c == ',') && i > 0 && i + 1 < token.size()) {
      continue;
    } else if ((c == '-' || c == '+') && i == 0 && token.size() > 1) {
      continue;
    } else {
      return false;
    }
  }
  return digit_seen;
}

std::string surface_from_uri(std::string_view uri) {
  std::string_view local = uri;
  if (!local.empty() && local.front() == '<' && local.back() == '>') {
    local = local.substr(1, local.size() - 2);
    if (auto slash = local.find_last_of("/#"); slash != std::string_view::npos) local = local.substr(slash + 1);
  } else if (auto colon = local.find(':'); colon != std::string_view::npos) {
    local = local.substr(colon + 1);
  }
  std::string out;
  out.reserve(local.size());
  for (char c : local) out.push_back(c == '_' ? ' ' : c);
  // Drop a trailing disambiguation suffix such as " (album)".
  if (!out.empty() && out.back() == ')') {
    if (auto open = out.rfind(" ("); open != std::string::npos && open > 0) out.erase(open);
  }
  return out;
}

}  // namespace triplesum::text
