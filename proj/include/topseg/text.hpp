#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "topseg/common.hpp"

namespace topseg {

namespace detail {

// Byte length of the UTF-8 sequence starting at s[i]. Malformed bytes are
// treated as single-byte characters rather than rejected.
inline std::size_t utf8_len(const std::string& s, std::size_t i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  if ((c & 0xe0) == 0xc0) len = 2;
  else if ((c & 0xf0) == 0xe0) len = 3;
  else if ((c & 0xf8) == 0xf0) len = 4;
  if (i + len > s.size()) len = 1;
  return len;
}

inline std::uint32_t utf8_cp(const std::string& s, std::size_t i,
                             std::size_t len) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  if (len == 1) return c;
  std::uint32_t cp = c & (0xff >> (len + 1));
  for (std::size_t k = 1; k < len; ++k) {
    cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
  }
  return cp;
}

inline bool is_space_cp(std::uint32_t cp) {
  if (cp < 0x80) return std::isspace(int(cp)) != 0;
  switch (cp) {
    case 0xa0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202f: case 0x205f: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200a;
  }
}

inline bool is_punct_cp(std::uint32_t cp) {
  return cp < 0x80 && std::ispunct(int(cp)) != 0;
}

}  // namespace detail

// Lowercases (ASCII), splits on whitespace, and makes every punctuation
// character its own token. "Hello, world!" -> ["hello", ",", "world", "!"].
inline std::vector<std::string> word_tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      tokens.push_back(word);
      word.clear();
    }
  };
  for (std::size_t i = 0; i < text.size();) {
    std::size_t len = detail::utf8_len(text, i);
    std::uint32_t cp = detail::utf8_cp(text, i, len);
    if (detail::is_space_cp(cp)) {
      flush();
    } else if (detail::is_punct_cp(cp)) {
      flush();
      tokens.push_back(text.substr(i, len));
    } else {
      if (cp < 0x80) {
        word.push_back(char(std::tolower(int(cp))));
      } else {
        word.append(text, i, len);
      }
    }
    i += len;
  }
  flush();
  return tokens;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Splits on '.', '!' or '?' followed by whitespace; the remainder is the
// final sentence. Text without such punctuation is a single sentence.
inline std::vector<std::string> sentence_split(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      std::string chunk = trim(text.substr(start, i + 1 - start));
      if (!chunk.empty()) out.push_back(chunk);
      start = i + 1;
    }
  }
  std::string tail = trim(text.substr(start));
  if (!tail.empty()) out.push_back(tail);
  return out;
}

}  // namespace topseg
