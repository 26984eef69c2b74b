#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "topseg/model_factory.hpp"
#include "topseg/segmenter.hpp"

namespace topseg {

// Checkpoint file: one line of JSON manifest (version, family, config,
// vocabulary, parameter table with byte offsets) followed immediately by the
// raw little-endian float32 payload. Round-trips are bit-exact.
inline constexpr int kCheckpointVersion = 1;

static_assert(sizeof(float) == 4, "float32 payload assumes 4-byte floats");

inline void save_checkpoint(const Segmenter& model, const std::string& path) {
  Json manifest;
  manifest["version"] = kCheckpointVersion;
  manifest["family"] = model.family();
  manifest["config"] = model.config_json();
  manifest["vocab"] = model.vocab().tokens;
  Json table = Json::array();
  std::int64_t offset = 0;
  for (const auto& [name, t] : model.params()) {
    table.push_back(Json{{"name", name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.numel() * 4;
  }
  manifest["params"] = std::move(table);

  std::ofstream out(path, std::ios::binary);
  require(out.good(), "checkpoint: cannot write ", path);
  out << manifest.dump() << "\n";
  for (const auto& [name, t] : model.params()) {
    out.write(reinterpret_cast<const char*>(t.data.data()),
              std::streamsize(t.data.size() * 4));
  }
  require(out.good(), "checkpoint: write failed for ", path);
}

inline std::unique_ptr<Segmenter> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "checkpoint: cannot open ", path);
  std::string line;
  require(bool(std::getline(in, line)), "checkpoint: missing manifest in ", path);
  Json manifest;
  try {
    manifest = Json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(cat("checkpoint: bad manifest in ", path, ": ", e.what()));
  }
  const int version = get_req<int>(manifest, "version", "checkpoint");
  require(version == kCheckpointVersion, "checkpoint: version ", version,
          " not supported (expected ", kCheckpointVersion, ")");
  const auto family = get_req<std::string>(manifest, "family", "checkpoint");
  require(manifest.contains("config") && manifest.contains("vocab") &&
              manifest.contains("params"),
          "checkpoint: manifest missing config/vocab/params");

  Vocabulary vocab;
  for (const auto& tok : manifest["vocab"]) {
    vocab.add(tok.get<std::string>());
  }
  vocab.check_specials();

  ParamStore params;
  std::int64_t expected_offset = 0;
  for (const auto& entry : manifest["params"]) {
    const auto name = get_req<std::string>(entry, "name", "checkpoint param");
    const auto shape = get_req<std::vector<int>>(entry, "shape", "checkpoint param");
    const auto offset = get_req<std::int64_t>(entry, "offset", "checkpoint param");
    require(offset == expected_offset, "checkpoint: parameter '", name,
            "' at offset ", offset, ", expected ", expected_offset);
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data.data()),
            std::streamsize(t.data.size() * 4));
    require(in.gcount() == std::streamsize(t.data.size() * 4),
            "checkpoint: payload truncated at parameter '", name, "'");
    expected_offset += t.numel() * 4;
    params.emplace(name, std::move(t));
  }
  in.peek();
  require(in.eof(), "checkpoint: trailing bytes after payload in ", path);
  return make_segmenter(family, manifest["config"], std::move(vocab),
                        std::move(params));
}

}  // namespace topseg
