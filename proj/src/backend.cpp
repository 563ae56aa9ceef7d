#include "yamlsmith/backend.hpp"

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

namespace yamlsmith::backend {

namespace {

using json = nlohmann::json;

struct ParsedEndpoint {
  std::string origin;  // scheme://host[:port]
  std::string base_path;
};

ParsedEndpoint split_endpoint(std::string_view endpoint) {
  std::string url(endpoint);
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw BackendError(ErrorKind::invalid_request, url, "endpoint must be an http:// URL");
  }
  if (url.compare(0, scheme_end, "http") != 0) {
    throw BackendError(ErrorKind::invalid_request, url, "only plain http endpoints are supported");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string describe(httplib::Error error) { return httplib::to_string(error); }

}  // namespace

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::stop:
      return "stop";
    case FinishReason::length:
      return "length";
    case FinishReason::error:
      return "error";
  }
  return "error";
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_request:
      return "invalid_request";
    case ErrorKind::connection:
      return "connection";
    case ErrorKind::http_status:
      return "http_status";
    case ErrorKind::malformed_body:
      return "malformed_body";
    case ErrorKind::timeout:
      return "timeout";
    case ErrorKind::not_found:
      return "not_found";
    case ErrorKind::io:
      return "io";
    case ErrorKind::malformed_record:
      return "malformed_record";
  }
  return "io";
}

BackendError::BackendError(ErrorKind kind, std::string endpoint, std::string cause)
    : std::runtime_error(std::string(to_string(kind)) + " error (" + endpoint + "): " + cause),
      kind_(kind),
      endpoint_(std::move(endpoint)),
      cause_(std::move(cause)) {}

void validate_request(const GenerationRequest& request) {
  if (request.max_new_tokens == 0) {
    throw BackendError(ErrorKind::invalid_request, "", "max_new_tokens must be positive");
  }
  if (!(request.temperature >= 0.0)) {
    throw BackendError(ErrorKind::invalid_request, "", "temperature must be non-negative");
  }
}

std::string resolve_endpoint(std::string_view configured) {
  if (const char* env = std::getenv(std::string(kEndpointEnv).c_str()); env && *env) {
    return env;
  }
  return std::string(configured);
}

ModelResponse complete(const GenerationRequest& request, std::string_view endpoint,
                       std::chrono::milliseconds timeout) {
  validate_request(request);
  const auto target = split_endpoint(endpoint);
  const std::string url = target.origin + target.base_path;

  httplib::Client client(target.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  json body = {
      {"prompt", request.prompt},
      {"n_predict", request.max_new_tokens},
      {"temperature", request.temperature},
      {"stop", request.stop_markers},
  };

  const auto started = std::chrono::steady_clock::now();
  auto result = client.Post(target.base_path + "/completion", body.dump(), "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - started;

  if (!result) {
    const auto error = result.error();
    if (error == httplib::Error::ConnectionTimeout) {
      throw BackendError(ErrorKind::timeout, url, describe(error));
    }
    // httplib reports an expired read timeout as a plain read error.
    if (error == httplib::Error::Read && elapsed >= timeout * 9 / 10) {
      throw BackendError(ErrorKind::timeout, url, "no response within " +
                                                      std::to_string(timeout.count()) + " ms");
    }
    throw BackendError(ErrorKind::connection, url, describe(error));
  }
  if (result->status < 200 || result->status >= 300) {
    throw BackendError(ErrorKind::http_status, url, "HTTP " + std::to_string(result->status));
  }

  const json reply = json::parse(result->body, nullptr, /*allow_exceptions=*/false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("content") ||
      !reply["content"].is_string()) {
    throw BackendError(ErrorKind::malformed_body, url, "expected a JSON object with \"content\"");
  }

  ModelResponse response;
  response.text = reply["content"].get<std::string>();
  response.model_name = request.model_name;
  const bool eos = reply.value("stopped_eos", false);
  const bool word = reply.value("stopped_word", false);
  response.finish_reason = (eos || word) ? FinishReason::stop : FinishReason::length;
  response.latency_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count());
  return response;
}

}  // namespace yamlsmith::backend
