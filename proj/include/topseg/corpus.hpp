#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topseg/common.hpp"
#include "topseg/rng.hpp"
#include "topseg/text.hpp"

namespace topseg {

struct Sentence {
  std::string text;
  std::vector<std::string> word_tokens;

  static Sentence make(std::string text) {
    Sentence s;
    s.word_tokens = word_tokenize(text);
    s.text = std::move(text);
    return s;
  }
};

struct Turn {
  std::string speaker;
  std::string text;
  std::vector<std::string> sentences;  // text split at parse time
};

struct Conversation {
  std::string id;
  std::vector<Turn> turns;

  std::size_t sentence_count() const {
    std::size_t n = 0;
    for (const auto& t : turns) n += t.sentences.size();
    return n;
  }
};

// A document stitched from K consecutive segments. labels[i] == 1 marks
// sentence i as the last sentence of its segment; the final label is always 1.
struct SegDocument {
  std::string doc_id;
  std::vector<Sentence> sentences;
  std::vector<int> labels;
  std::vector<std::string> source_ids;  // one per segment; empty if unknown

  std::size_t size() const { return sentences.size(); }
};

struct CorpusSplits {
  std::vector<SegDocument> train, dev, test;
};

struct DatasetProfile {
  std::int64_t documents = 0;
  std::int64_t segments = 0;
  std::int64_t sentences = 0;
  double sentence_len_mean = 0.0;  // words per sentence
  double sentence_len_std = 0.0;
  double segment_len_mean = 0.0;  // sentences per segment
  double segment_len_std = 0.0;
  double boundary_rate = 0.0;  // positives among the n-1 candidates
};

// ---------------------------------------------------------------------------
// wiki-style files: one sentence per line, "========"-prefixed delimiter
// lines separate segments.

inline std::vector<std::vector<std::string>> parse_wiki(std::istream& in) {
  std::vector<std::vector<std::string>> segments;
  std::vector<std::string> current;
  auto flush = [&] {
    if (!current.empty()) segments.push_back(std::move(current));
    current = {};
  };
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("========", 0) == 0) {
      flush();
      continue;
    }
    std::string t = trim(line);
    if (!t.empty()) current.push_back(std::move(t));
  }
  flush();
  return segments;
}

inline SegDocument document_from_segments(
    const std::vector<std::vector<std::string>>& segments, std::string doc_id,
    std::vector<std::string> source_ids = {}) {
  require(!segments.empty(), "document '", doc_id, "': no segments");
  SegDocument doc;
  doc.doc_id = std::move(doc_id);
  doc.source_ids = std::move(source_ids);
  for (const auto& seg : segments) {
    std::size_t added = 0;
    for (const auto& text : seg) {
      Sentence s = Sentence::make(text);
      if (s.word_tokens.empty()) continue;  // nothing to model
      doc.sentences.push_back(std::move(s));
      doc.labels.push_back(0);
      ++added;
    }
    require(added > 0, "document '", doc.doc_id, "': empty segment");
    doc.labels.back() = 1;
  }
  return doc;
}

// Either one file (one document) or a directory of files, read in filename
// order.
inline std::vector<SegDocument> load_wiki_corpus(const std::string& path) {
  namespace fs = std::filesystem;
  require(fs::exists(path), "wiki corpus: no such path: ", path);
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  require(!files.empty(), "wiki corpus: no files under ", path);
  std::vector<SegDocument> docs;
  for (const auto& f : files) {
    std::ifstream in(f);
    require(in.good(), "wiki corpus: cannot open ", f.string());
    auto segments = parse_wiki(in);
    require(!segments.empty(), "wiki corpus: no segments in ", f.string());
    docs.push_back(
        document_from_segments(segments, f.filename().string()));
  }
  return docs;
}

// ---------------------------------------------------------------------------
// chat-style corpora: JSONL, one conversation per line:
//   {"id": "...", "turns": [{"speaker": "...", "text": "..."}, ...]}

inline Conversation parse_chat_jsonl(const std::string& line,
                                     std::size_t line_no = 1) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(cat("chat line ", line_no, ": invalid JSON: ", e.what()));
  }
  auto need = [&](const nlohmann::json& obj, const char* field,
                  const char* where) -> const nlohmann::json& {
    auto it = obj.find(field);
    require(it != obj.end(), "chat line ", line_no, ": ", where,
            " missing field \"", field, "\"");
    return *it;
  };
  require(j.is_object(), "chat line ", line_no, ": expected an object");
  Conversation conv;
  const auto& id = need(j, "id", "conversation");
  require(id.is_string(), "chat line ", line_no, ": \"id\" must be a string");
  conv.id = id.get<std::string>();
  const auto& turns = need(j, "turns", "conversation");
  require(turns.is_array() && !turns.empty(), "chat line ", line_no,
          ": \"turns\" must be a non-empty array");
  for (const auto& tj : turns) {
    require(tj.is_object(), "chat line ", line_no, ": turn must be an object");
    Turn t;
    const auto& speaker = need(tj, "speaker", "turn");
    require(speaker.is_string(), "chat line ", line_no,
            ": \"speaker\" must be a string");
    t.speaker = speaker.get<std::string>();
    const auto& text = need(tj, "text", "turn");
    require(text.is_string(), "chat line ", line_no,
            ": \"text\" must be a string");
    t.text = text.get<std::string>();
    require(!trim(t.text).empty(), "chat line ", line_no,
            ": turn \"text\" is empty");
    t.sentences = sentence_split(t.text);
    conv.turns.push_back(std::move(t));
  }
  return conv;
}

inline std::vector<Conversation> load_chat_corpus(std::istream& in) {
  std::vector<Conversation> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    out.push_back(parse_chat_jsonl(line, line_no));
  }
  return out;
}

inline std::vector<Conversation> load_chat_corpus(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "chat corpus: cannot open ", path);
  return load_chat_corpus(in);
}

inline void write_chat_corpus(const std::vector<Conversation>& convs,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "chat corpus: cannot write ", path);
  for (const auto& c : convs) {
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& t : c.turns) {
      turns.push_back({{"speaker", t.speaker}, {"text", t.text}});
    }
    nlohmann::json j{{"id", c.id}, {"turns", std::move(turns)}};
    out << j.dump() << "\n";
  }
}

// ---------------------------------------------------------------------------
// documents

// Shuffles conversations by seed and stitches consecutive groups of K into
// documents (one conversation = one segment). floor(N/K) documents; the
// remainder is dropped.
inline std::vector<SegDocument> build_documents(
    const std::vector<Conversation>& conversations, int k,
    std::uint64_t seed) {
  require(k >= 2, "build_documents: need at least 2 segments per document, got ",
          k);
  require(int(conversations.size()) >= k, "build_documents: ",
          conversations.size(), " conversations cannot fill a document of ", k,
          " segments");
  std::vector<std::size_t> order(conversations.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t n_docs = conversations.size() / std::size_t(k);
  std::vector<SegDocument> docs;
  docs.reserve(n_docs);
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::vector<std::vector<std::string>> segments;
    std::vector<std::string> sources;
    for (int s = 0; s < k; ++s) {
      const Conversation& conv = conversations[order[d * std::size_t(k) + s]];
      std::vector<std::string> seg;
      for (const auto& turn : conv.turns) {
        for (const auto& sent : turn.sentences) seg.push_back(sent);
      }
      require(!seg.empty(), "build_documents: conversation '", conv.id,
              "' has no sentences");
      segments.push_back(std::move(seg));
      sources.push_back(conv.id);
    }
    std::ostringstream id;
    id << "doc-" << std::setw(5) << std::setfill('0') << d;
    docs.push_back(
        document_from_segments(segments, id.str(), std::move(sources)));
  }
  return docs;
}

// dev/test sizes are floors of the ratios; train takes the remainder.
inline CorpusSplits split_corpus(const std::vector<SegDocument>& docs,
                                 double train_ratio, double dev_ratio,
                                 double test_ratio, std::uint64_t seed) {
  require(train_ratio > 0 && dev_ratio > 0 && test_ratio > 0,
          "split_corpus: ratios must be positive");
  require(std::abs(train_ratio + dev_ratio + test_ratio - 1.0) < 1e-9,
          "split_corpus: ratios must sum to 1, got ",
          train_ratio + dev_ratio + test_ratio);
  const std::size_t n = docs.size();
  const std::size_t n_dev = std::size_t(std::floor(dev_ratio * double(n)));
  const std::size_t n_test = std::size_t(std::floor(test_ratio * double(n)));
  require(n_dev > 0 && n_test > 0 && n_dev + n_test < n,
          "split_corpus: empty split for ", n, " documents with ratios (",
          train_ratio, ",", dev_ratio, ",", test_ratio, ")");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  CorpusSplits out;
  const std::size_t n_train = n - n_dev - n_test;
  for (std::size_t i = 0; i < n; ++i) {
    const SegDocument& d = docs[order[i]];
    if (i < n_train) out.train.push_back(d);
    else if (i < n_train + n_dev) out.dev.push_back(d);
    else out.test.push_back(d);
  }
  return out;
}

// Population statistics (divide by N, not N-1).
inline DatasetProfile corpus_stats(const std::vector<SegDocument>& docs) {
  require(!docs.empty(), "corpus_stats: empty corpus");
  DatasetProfile p;
  p.documents = std::int64_t(docs.size());
  double sent_sum = 0.0, sent_sq = 0.0;
  double seg_sum = 0.0, seg_sq = 0.0;
  std::int64_t positives = 0, candidates = 0;
  for (const auto& d : docs) {
    require(!d.sentences.empty(), "corpus_stats: document '", d.doc_id,
            "' has no sentences");
    std::int64_t seg_len = 0;
    for (std::size_t i = 0; i < d.sentences.size(); ++i) {
      const double w = double(d.sentences[i].word_tokens.size());
      sent_sum += w;
      sent_sq += w * w;
      ++p.sentences;
      ++seg_len;
      if (d.labels[i] == 1) {
        seg_sum += double(seg_len);
        seg_sq += double(seg_len) * double(seg_len);
        ++p.segments;
        seg_len = 0;
      }
    }
    candidates += std::int64_t(d.sentences.size()) - 1;
    for (std::size_t i = 0; i + 1 < d.sentences.size(); ++i) {
      positives += d.labels[i];
    }
  }
  p.sentence_len_mean = sent_sum / double(p.sentences);
  p.sentence_len_std =
      std::sqrt(std::max(0.0, sent_sq / double(p.sentences) -
                                  p.sentence_len_mean * p.sentence_len_mean));
  p.segment_len_mean = seg_sum / double(p.segments);
  p.segment_len_std =
      std::sqrt(std::max(0.0, seg_sq / double(p.segments) -
                                  p.segment_len_mean * p.segment_len_mean));
  p.boundary_rate = candidates > 0 ? double(positives) / double(candidates) : 0.0;
  return p;
}

// ---------------------------------------------------------------------------
// labeled-document JSONL: {"doc_id": ..., "sentences": [...], "labels": [...]}

inline void write_documents(const std::vector<SegDocument>& docs,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "documents: cannot write ", path);
  for (const auto& d : docs) {
    nlohmann::json sentences = nlohmann::json::array();
    for (const auto& s : d.sentences) sentences.push_back(s.text);
    nlohmann::json j{{"doc_id", d.doc_id},
                     {"sentences", std::move(sentences)},
                     {"labels", d.labels}};
    out << j.dump() << "\n";
  }
}

inline std::vector<SegDocument> read_documents(std::istream& in) {
  std::vector<SegDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(cat("documents line ", line_no, ": invalid JSON: ", e.what()));
    }
    require(j.is_object() && j.contains("doc_id") && j.contains("sentences") &&
                j.contains("labels"),
            "documents line ", line_no,
            ": need fields \"doc_id\", \"sentences\", \"labels\"");
    for (auto it = j.begin(); it != j.end(); ++it) {
      require(it.key() == "doc_id" || it.key() == "sentences" ||
                  it.key() == "labels",
              "documents line ", line_no, ": unknown field \"", it.key(), "\"");
    }
    SegDocument d;
    d.doc_id = j["doc_id"].get<std::string>();
    const auto& sents = j["sentences"];
    const auto& labels = j["labels"];
    require(sents.is_array() && labels.is_array() &&
                sents.size() == labels.size() && !sents.empty(),
            "documents line ", line_no,
            ": \"sentences\" and \"labels\" must be equal-length non-empty arrays");
    for (const auto& s : sents) {
      d.sentences.push_back(Sentence::make(s.get<std::string>()));
    }
    for (const auto& l : labels) {
      int v = l.get<int>();
      require(v == 0 || v == 1, "documents line ", line_no,
              ": labels must be 0 or 1");
      d.labels.push_back(v);
    }
    require(d.labels.back() == 1, "documents line ", line_no,
            ": final sentence must close a segment");
    docs.push_back(std::move(d));
  }
  return docs;
}

inline std::vector<SegDocument> read_documents(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "documents: cannot open ", path);
  return read_documents(in);
}

}  // namespace topseg
