#pragma once

// Tokenization and sentence splitting for English text.
//
// Tokens are lowercased. Word characters are ASCII letters and digits plus
// any byte >= 0x80 (so UTF-8 sequences stay inside their word). An
// apostrophe between two word characters belongs to the word ("don't");
// every other non-space character becomes a one-character token.

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace uttergen {

struct TokenSpan {
  std::string text;   // lowercased
  std::size_t begin;  // byte offset into the original text
  std::size_t end;
};

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') ||
         (u >= 'A' && u <= 'Z');
}

inline char lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace detail

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = detail::lower(c);
  return out;
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && detail::is_space(s[b])) ++b;
  while (e > b && detail::is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

inline std::vector<TokenSpan> tokenize_spans(std::string_view text) {
  std::vector<TokenSpan> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    char c = text[i];
    if (detail::is_space(c)) {
      ++i;
      continue;
    }
    if (!detail::is_word_byte(c)) {
      out.push_back({std::string(1, c), i, i + 1});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n) {
      if (detail::is_word_byte(text[j])) {
        ++j;
      } else if (text[j] == '\'' && j + 1 < n && detail::is_word_byte(text[j + 1])) {
        // text[j - 1] is a word byte because we are inside a word.
        ++j;
      } else {
        break;
      }
    }
    out.push_back({to_lower(text.substr(i, j - i)), i, j});
    i = j;
  }
  return out;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_spans(text)) out.push_back(std::move(t.text));
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Canonical comparison key: tokens joined by single spaces. Two texts that
/// differ only in case, spacing, or spacing around punctuation share a key.
inline std::string fold(std::string_view text) { return join(tokenize(text)); }

/// True if the token contains no word character (".", "?", "-", ...).
inline bool is_punctuation(std::string_view token) {
  return std::none_of(token.begin(), token.end(), detail::is_word_byte);
}

inline constexpr std::array<std::string_view, 7> kAbbreviations = {"mr",  "mrs", "dr", "e.g",
                                                                   "i.e", "etc", "vs"};

/// Splits on '.', '?' and '!' followed by whitespace or end of text, except
/// after a known abbreviation. Returned sentences are trimmed and non-empty.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  auto emit = [&](std::size_t from, std::size_t to) {
    auto s = trim(text.substr(from, to - from));
    if (!s.empty()) out.emplace_back(s);
  };

  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    if (i + 1 < text.size() && !detail::is_space(text[i + 1])) continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > start && !detail::is_space(text[w - 1])) --w;
      auto word = text.substr(w, i - w);
      while (!word.empty() && !detail::is_word_byte(word.front())) word.remove_prefix(1);
      auto lw = to_lower(word);
      if (std::find(kAbbreviations.begin(), kAbbreviations.end(), lw) != kAbbreviations.end())
        continue;
    }
    emit(start, i + 1);
    start = i + 1;
  }
  emit(start, text.size());
  return out;
}

}  // namespace uttergen
