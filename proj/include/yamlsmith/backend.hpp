#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace yamlsmith::backend {

enum class FinishReason { stop, length, error };

std::string_view to_string(FinishReason reason);

struct GenerationRequest {
  std::string prompt;
  std::size_t max_new_tokens = 512;
  double temperature = 0.2;
  std::vector<std::string> stop_markers;
  std::string model_name;
  // Replay only: which recorded sample to return when a prompt was recorded
  // several times for the same model (0-based, file order).
  std::size_t sample = 0;
};

void validate_request(const GenerationRequest& request);

struct ModelResponse {
  std::string text;
  std::string model_name;
  FinishReason finish_reason = FinishReason::stop;
  std::uint64_t latency_ms = 0;
};

enum class ErrorKind {
  invalid_request,
  connection,
  http_status,
  malformed_body,
  timeout,
  not_found,
  io,
  malformed_record,
};

std::string_view to_string(ErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(ErrorKind kind, std::string endpoint, std::string cause);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& endpoint() const noexcept { return endpoint_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  ErrorKind kind_;
  std::string endpoint_;
  std::string cause_;
};

inline constexpr std::string_view kDefaultEndpoint = "http://127.0.0.1:8080";
inline constexpr std::string_view kEndpointEnv = "YAMLSMITH_ENDPOINT";

/// `YAMLSMITH_ENDPOINT` when set and non-empty, otherwise `configured`.
std::string resolve_endpoint(std::string_view configured);

/// POST {endpoint}/completion with {prompt, n_predict, temperature, stop}.
/// Throws BackendError (connection, http_status, malformed_body, timeout).
ModelResponse complete(const GenerationRequest& request, std::string_view endpoint,
                       std::chrono::milliseconds timeout = std::chrono::seconds(120));

/// Hex SHA-256 of the exact prompt bytes.
std::string prompt_digest(std::string_view prompt);

/// One recorded exchange; a line of the JSON Lines fixture file.
struct TranscriptRecord {
  int annexe = 0;
  int tir = 0;
  std::string model;
  std::string prompt;
  std::string response;

  /// "annexe<N>.tir<M>"
  std::string id() const;
};

/// Immutable store of recorded exchanges, keyed by prompt digest.
class TranscriptStore {
 public:
  TranscriptStore() = default;
  TranscriptStore(std::vector<TranscriptRecord> records, std::string source_path);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<TranscriptRecord>& records() const noexcept { return records_; }
  const std::string& source_path() const noexcept { return source_path_; }

  /// Records sharing this digest, in file order.
  std::vector<const TranscriptRecord*> find(std::string_view digest) const;

  /// Position of `record` among records with the same prompt and model.
  std::size_t sample_index(std::size_t record_index) const;

 private:
  std::vector<TranscriptRecord> records_;
  std::string source_path_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_digest_;
};

/// Unescapes the publishing escapes \' and \t found in transcripts.
std::string unescape_transcript(std::string_view text);

/// Throws BackendError(io) for unreadable files and
/// BackendError(malformed_record) for bad lines.
TranscriptStore load_transcripts(const std::filesystem::path& path);
TranscriptStore parse_transcripts(std::string_view jsonl, std::string source_path);

/// Exact-digest lookup. Filters by model when the request names one, then
/// picks `request.sample`. Throws BackendError(not_found) naming the digest.
ModelResponse replay_complete(const GenerationRequest& request, const TranscriptStore& store);

}  // namespace yamlsmith::backend
