#pragma once

#include <array>
#include <string_view>

namespace triplesum {

inline constexpr std::string_view kStartToken = "<start>";
inline constexpr std::string_view kEndToken = "<end>";
inline constexpr std::string_view kItemToken = "<item>";
inline constexpr std::string_view kRareToken = "<rare>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kYearToken = "<year>";
inline constexpr std::string_view kZeroToken = "0";
inline constexpr std::string_view kResourceToken = "<resource>";
inline constexpr std::string_view kPadToken = "<pad>";

// Reserved tokens in their fixed vocabulary order (indices 0..8).
inline constexpr std::array<std::string_view, 9> kSpecialTokens{
    kStartToken, kEndToken, kItemToken, kRareToken, kUnkToken,
    kYearToken,  kZeroToken, kResourceToken, kPadToken};

enum SpecialIndex : int {
  kStartIndex = 0,
  kEndIndex = 1,
  kItemIndex = 2,
  kRareIndex = 3,
  kUnkIndex = 4,
  kYearIndex = 5,
  kZeroIndex = 6,
  kResourceIndex = 7,
  kPadIndex = 8,
};

constexpr bool is_special_token(std::string_view t) {
  for (auto s : kSpecialTokens)
    if (s == t) return true;
  return false;
}

}  // namespace triplesum
