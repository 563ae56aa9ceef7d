#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "yamlsmith/backend.hpp"

namespace yamlsmith::testing {

inline std::string fixture_path(const std::string& name) { return std::string(YAMLSMITH_FIXTURE_DIR) + "/" + name; }
inline std::string data_path(const std::string& name) { return std::string(YAMLSMITH_DATA_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline const backend::TranscriptStore& corpus() {
  static const auto store = backend::load_transcripts(fixture_path("transcripts.jsonl"));
  return store;
}

inline const backend::TranscriptRecord& record(const std::string& id) {
  for (const auto& r : corpus().records()) {
    if (r.id() == id) return r;
  }
  throw std::runtime_error("no fixture " + id);
}

}  // namespace yamlsmith::testing
