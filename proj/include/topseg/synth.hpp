#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "topseg/common.hpp"
#include "topseg/corpus.hpp"
#include "topseg/rng.hpp"

namespace topseg {

// Synthetic conversation generator. Each conversation draws its words from
// one topic's pool, mixed with a shared pool at rate shared_fraction, so
// topic shifts are detectable but not trivial.
struct SynthSpec {
  int topics = 6;
  int conversations = 300;
  double sent_len_mean = 8.0;  // words; clipped rounded normal
  double sent_len_std = 3.0;
  int sent_len_min = 3;
  int sent_len_max = 20;
  int conv_len_min = 4;  // sentences per conversation, uniform
  int conv_len_max = 8;
  double shared_fraction = 0.2;
  int topic_pool = 40;  // words per topic
  int shared_pool = 30;
  std::string word_tag;  // prefixed to every generated word
  std::uint64_t seed = 1;

  void validate() const {
    require(topics >= 2, "synth: need at least 2 topics, got ", topics);
    require(conversations >= topics, "synth: need at least ", topics,
            " conversations, got ", conversations);
    require(shared_fraction >= 0.0 && shared_fraction < 1.0,
            "synth: shared_fraction must lie in [0,1), got ", shared_fraction);
    require(sent_len_min >= 1 && sent_len_max >= sent_len_min,
            "synth: bad sentence length bounds [", sent_len_min, ",",
            sent_len_max, "]");
    require(sent_len_std >= 0.0, "synth: sentence length std must be >= 0");
    require(conv_len_min >= 1 && conv_len_max >= conv_len_min,
            "synth: bad conversation length bounds [", conv_len_min, ",",
            conv_len_max, "]");
    require(topic_pool >= 1 && shared_pool >= 1, "synth: empty word pool");
  }
};

inline std::vector<Conversation> synth_generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  auto topic_word = [&](int topic, int j) {
    return cat(spec.word_tag, "t", topic, "w", j);
  };
  auto shared_word = [&](int j) { return cat(spec.word_tag, "sw", j); };

  std::vector<Conversation> out;
  out.reserve(std::size_t(spec.conversations));
  for (int ci = 0; ci < spec.conversations; ++ci) {
    const int topic = ci % spec.topics;  // every topic occurs
    Conversation conv;
    std::ostringstream id;
    id << "synth-" << spec.seed << "-" << ci;
    conv.id = id.str();
    const int n_sent =
        spec.conv_len_min +
        int(rng.next_below(std::size_t(spec.conv_len_max - spec.conv_len_min + 1)));
    for (int si = 0; si < n_sent; ++si) {
      int len = int(std::lround(rng.normal(spec.sent_len_mean, spec.sent_len_std)));
      len = std::min(spec.sent_len_max, std::max(spec.sent_len_min, len));
      std::string text;
      for (int wi = 0; wi < len; ++wi) {
        if (wi) text += ' ';
        if (rng.next_unit() < spec.shared_fraction) {
          text += shared_word(int(rng.next_below(std::size_t(spec.shared_pool))));
        } else {
          text += topic_word(topic,
                             int(rng.next_below(std::size_t(spec.topic_pool))));
        }
      }
      Turn turn;
      turn.speaker = si % 2 == 0 ? "A" : "B";
      turn.text = std::move(text);
      turn.sentences = {turn.text};
      conv.turns.push_back(std::move(turn));
    }
    out.push_back(std::move(conv));
  }
  return out;
}

}  // namespace topseg
