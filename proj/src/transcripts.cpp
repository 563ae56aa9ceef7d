#include "yamlsmith/backend.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

namespace yamlsmith::backend {

namespace {

using json = nlohmann::json;

std::string hex(const unsigned char* data, std::size_t size) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(size * 2);
  for (std::size_t i = 0; i < size; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0x0f]);
  }
  return out;
}

std::string field_string(const json& record, const char* key, std::size_t line,
                         const std::string& source) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw BackendError(ErrorKind::malformed_record, source,
                       "line " + std::to_string(line) + ": missing string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

int field_int(const json& record, const char* key, std::size_t line, const std::string& source) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_number_integer()) {
    throw BackendError(ErrorKind::malformed_record, source,
                       "line " + std::to_string(line) + ": missing integer field \"" + key + "\"");
  }
  return it->get<int>();
}

}  // namespace

std::string prompt_digest(std::string_view prompt) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int size = 0;
  if (EVP_Digest(prompt.data(), prompt.size(), digest.data(), &size, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return hex(digest.data(), size);
}

std::string TranscriptRecord::id() const {
  return "annexe" + std::to_string(annexe) + ".tir" + std::to_string(tir);
}

TranscriptStore::TranscriptStore(std::vector<TranscriptRecord> records, std::string source_path)
    : records_(std::move(records)), source_path_(std::move(source_path)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    by_digest_[prompt_digest(records_[i].prompt)].push_back(i);
  }
}

std::vector<const TranscriptRecord*> TranscriptStore::find(std::string_view digest) const {
  std::vector<const TranscriptRecord*> out;
  if (const auto it = by_digest_.find(digest); it != by_digest_.end()) {
    for (const auto index : it->second) out.push_back(&records_[index]);
  }
  return out;
}

std::size_t TranscriptStore::sample_index(std::size_t record_index) const {
  const auto& record = records_.at(record_index);
  std::size_t position = 0;
  for (const auto index : by_digest_.at(prompt_digest(record.prompt))) {
    if (index == record_index) break;
    if (records_[index].model == record.model) ++position;
  }
  return position;
}

std::string unescape_transcript(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      if (text[i + 1] == '\'') {
        out.push_back('\'');
        ++i;
        continue;
      }
      if (text[i + 1] == 't') {
        out.push_back('\t');
        ++i;
        continue;
      }
    }
    out.push_back(text[i]);
  }
  return out;
}

TranscriptStore parse_transcripts(std::string_view jsonl, std::string source_path) {
  std::vector<TranscriptRecord> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(start, end - start);
    ++line_no;
    start = end + 1;

    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == jsonl.size()) break;
      continue;
    }
    const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object()) {
      throw BackendError(ErrorKind::malformed_record, source_path,
                         "line " + std::to_string(line_no) + ": not a JSON object");
    }
    TranscriptRecord parsed;
    parsed.annexe = field_int(record, "annexe", line_no, source_path);
    parsed.tir = field_int(record, "tir", line_no, source_path);
    parsed.model = field_string(record, "model", line_no, source_path);
    parsed.prompt = unescape_transcript(field_string(record, "prompt", line_no, source_path));
    if (!record.contains("response")) {
      throw BackendError(ErrorKind::malformed_record, source_path,
                         "line " + std::to_string(line_no) + ": prompt without a model response");
    }
    parsed.response = unescape_transcript(field_string(record, "response", line_no, source_path));
    records.push_back(std::move(parsed));
    if (end == jsonl.size()) break;
  }
  return TranscriptStore(std::move(records), std::move(source_path));
}

TranscriptStore load_transcripts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendError(ErrorKind::io, path.string(), "cannot open transcript file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_transcripts(buffer.str(), path.string());
}

ModelResponse replay_complete(const GenerationRequest& request, const TranscriptStore& store) {
  const auto digest = prompt_digest(request.prompt);
  std::vector<const TranscriptRecord*> matches;
  for (const auto* record : store.find(digest)) {
    if (request.model_name.empty() || record->model == request.model_name) {
      matches.push_back(record);
    }
  }
  if (request.sample >= matches.size()) {
    std::string cause = "no recorded response for prompt digest " + digest;
    if (!request.model_name.empty()) cause += " and model " + request.model_name;
    if (request.sample > 0) cause += " (sample " + std::to_string(request.sample) + ")";
    throw BackendError(ErrorKind::not_found, store.source_path(), cause);
  }
  const auto* hit = matches[request.sample];
  ModelResponse response;
  response.text = hit->response;
  response.model_name = hit->model;
  response.finish_reason = FinishReason::stop;
  response.latency_ms = 0;
  return response;
}

}  // namespace yamlsmith::backend
