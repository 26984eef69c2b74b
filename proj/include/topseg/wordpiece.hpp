#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "topseg/common.hpp"
#include "topseg/corpus.hpp"
#include "topseg/text.hpp"

namespace topseg {

// Fixed special ids shared by every vocabulary.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;

struct Vocabulary {
  std::vector<std::string> tokens;  // id -> token
  std::unordered_map<std::string, int> ids;

  static Vocabulary with_specials() {
    Vocabulary v;
    v.add("[PAD]");
    v.add("[UNK]");
    v.add("[CLS]");
    v.add("[SEP]");
    return v;
  }

  int add(const std::string& token) {
    auto it = ids.find(token);
    if (it != ids.end()) return it->second;
    int id = int(tokens.size());
    tokens.push_back(token);
    ids.emplace(token, id);
    return id;
  }

  int lookup(const std::string& token) const {
    auto it = ids.find(token);
    return it == ids.end() ? kUnkId : it->second;
  }

  bool contains(const std::string& token) const {
    return ids.find(token) != ids.end();
  }

  int size() const { return int(tokens.size()); }

  void check_specials() const {
    require(size() >= 4 && tokens[0] == "[PAD]" && tokens[1] == "[UNK]" &&
                tokens[2] == "[CLS]" && tokens[3] == "[SEP]",
            "vocabulary: special tokens missing or misplaced");
  }
};

namespace detail {

// Code-point pieces of a word; pieces after the first carry the "##"
// continuation prefix.
inline std::vector<std::string> word_symbols(const std::string& word) {
  std::vector<std::string> sym;
  for (std::size_t i = 0; i < word.size();) {
    std::size_t len = utf8_len(word, i);
    std::string piece = word.substr(i, len);
    sym.push_back(sym.empty() ? piece : "##" + piece);
    i += len;
  }
  return sym;
}

inline std::string join_symbols(const std::string& left,
                                const std::string& right) {
  return left + (right.rfind("##", 0) == 0 ? right.substr(2) : right);
}

}  // namespace detail

// Frequency-merge subword inventory. Starts from specials plus every observed
// character (word-initial bare, continuation "##"-prefixed) and repeatedly
// merges the most frequent adjacent symbol pair, lexicographic ties first,
// until vocab_size entries exist or no pair occurs twice. If the character
// alphabet alone exceeds vocab_size the full alphabet is kept and no merges
// happen.
inline Vocabulary train_wordpiece(const std::vector<std::string>& sentences,
                                  int vocab_size) {
  // distinct words with corpus frequencies, insertion-ordered for determinism
  std::vector<std::pair<std::vector<std::string>, long long>> words;
  std::unordered_map<std::string, std::size_t> word_slot;
  std::vector<std::string> alphabet;
  std::unordered_map<std::string, char> seen_char;
  std::size_t distinct_chars = 0;
  for (const auto& sent : sentences) {
    for (const auto& w : word_tokenize(sent)) {
      auto [it, fresh] = word_slot.emplace(w, words.size());
      if (fresh) {
        words.emplace_back(detail::word_symbols(w), 1);
        for (const auto& sym : words.back().first) {
          auto [cit, new_sym] = seen_char.emplace(sym, 0);
          if (new_sym) alphabet.push_back(sym);
          std::string bare = sym.rfind("##", 0) == 0 ? sym.substr(2) : sym;
          auto [bit, new_char] = seen_char.emplace("\x01" + bare, 0);
          if (new_char) ++distinct_chars;
        }
      } else {
        ++words[it->second].second;
      }
    }
  }
  require(!words.empty(), "train_wordpiece: corpus has no words");
  require(vocab_size >= int(distinct_chars) + 4,
          "train_wordpiece: vocab_size ", vocab_size, " below ",
          distinct_chars, " distinct characters + 4 specials");

  Vocabulary vocab = Vocabulary::with_specials();
  std::sort(alphabet.begin(), alphabet.end());
  for (const auto& sym : alphabet) vocab.add(sym);

  while (vocab.size() < vocab_size) {
    std::map<std::pair<std::string, std::string>, long long> pair_counts;
    for (const auto& [symbols, freq] : words) {
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        pair_counts[{symbols[i], symbols[i + 1]}] += freq;
      }
    }
    std::pair<std::string, std::string> best;
    long long best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count) {  // map order makes ties lexicographic
        best = pair;
        best_count = count;
      }
    }
    if (best_count < 2) break;
    const std::string merged = detail::join_symbols(best.first, best.second);
    vocab.add(merged);
    for (auto& [symbols, freq] : words) {
      std::vector<std::string> next;
      next.reserve(symbols.size());
      for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i + 1 < symbols.size() && symbols[i] == best.first &&
            symbols[i + 1] == best.second) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(symbols[i]);
        }
      }
      symbols = std::move(next);
    }
  }
  return vocab;
}

// Greedy longest-match from the left; pieces after the first match with a
// "##" prefix. A word with no possible tiling becomes a single [UNK].
inline std::vector<int> wordpiece_encode_word(const Vocabulary& vocab,
                                              const std::string& word) {
  require(!word.empty(), "wordpiece_encode: empty word");
  std::vector<std::size_t> stops;  // code-point boundaries
  for (std::size_t i = 0; i < word.size();) {
    i += detail::utf8_len(word, i);
    stops.push_back(i);
  }
  std::vector<int> out;
  std::size_t start = 0;
  std::size_t stop_idx = 0;
  while (start < word.size()) {
    int matched = -1;
    std::size_t matched_end = 0;
    for (std::size_t e = stops.size(); e > stop_idx; --e) {
      std::string piece = word.substr(start, stops[e - 1] - start);
      if (start > 0) piece = "##" + piece;
      auto it = vocab.ids.find(piece);
      if (it != vocab.ids.end()) {
        matched = it->second;
        matched_end = e;
        break;
      }
    }
    if (matched < 0) return {kUnkId};
    out.push_back(matched);
    start = stops[matched_end - 1];
    stop_idx = matched_end;
  }
  return out;
}

inline std::vector<int> wordpiece_encode(const Vocabulary& vocab,
                                         const std::string& text) {
  std::vector<int> out;
  for (const auto& w : word_tokenize(text)) {
    auto ids = wordpiece_encode_word(vocab, w);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

// Whole-word vocabulary: most frequent first, ties lexicographic, capped at
// max_size entries including the specials.
inline Vocabulary build_word_vocab(const std::vector<SegDocument>& docs,
                                   int max_size) {
  require(max_size > 4, "build_word_vocab: max_size must exceed the specials");
  std::map<std::string, long long> counts;
  for (const auto& d : docs) {
    for (const auto& s : d.sentences) {
      for (const auto& w : s.word_tokens) ++counts[w];
    }
  }
  require(!counts.empty(), "build_word_vocab: corpus has no words");
  std::vector<std::pair<std::string, long long>> ranked(counts.begin(),
                                                        counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second != b.second ? a.second > b.second
                                                 : a.first < b.first;
                   });
  Vocabulary vocab = Vocabulary::with_specials();
  for (const auto& [word, count] : ranked) {
    if (vocab.size() >= max_size) break;
    vocab.add(word);
  }
  return vocab;
}

// Word-id encoding with [UNK] fallback, used by the word-level model.
inline std::vector<int> word_encode(const Vocabulary& vocab,
                                    const std::vector<std::string>& tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.lookup(t));
  return ids;
}

}  // namespace topseg
