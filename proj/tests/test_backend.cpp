#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <functional>
#include <map>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "support.hpp"
#include "yamlsmith/backend.hpp"

using namespace yamlsmith;
using backend::BackendError;
using backend::ErrorKind;

namespace {

// Local completion server with one route per behaviour under test.
class StubServer {
 public:
  StubServer() {
    server_.Post("/ok/completion", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"content":"ok","stopped_eos":true})", "application/json");
    });
    server_.Post("/length/completion", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"content":"truncated","stopped_eos":false})", "application/json");
    });
    server_.Post("/echo/completion", [](const httplib::Request& req, httplib::Response& res) {
      nlohmann::json reply = {{"content", req.body}, {"stopped_eos", true}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/fail/completion", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("boom", "text/plain");
    });
    server_.Post("/garbage/completion", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("<html>not json</html>", "text/html");
    });
    server_.Post("/nocontent/completion", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"stopped_eos":true})", "application/json");
    });
    server_.Post("/slow/completion", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(800));
      res.set_content(R"({"content":"late","stopped_eos":true})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& route) const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/" + route;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

StubServer& stub() {
  static StubServer server;
  return server;
}

backend::GenerationRequest request(const std::string& prompt) {
  backend::GenerationRequest r;
  r.prompt = prompt;
  return r;
}

// A port that was bound once and then closed, so nothing listens on it.
int closed_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

ErrorKind kind_of_failure(const std::function<void()>& call) {
  try {
    call();
  } catch (const BackendError& error) {
    return error.kind();
  }
  FAIL("expected a BackendError");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("complete: stub returning ok") {
  const auto response = backend::complete(request("hi"), stub().url("ok"));
  CHECK(response.text == "ok");
  CHECK(response.finish_reason == backend::FinishReason::stop);
}

TEST_CASE("complete: length stop and wire format") {
  CHECK(backend::complete(request("hi"), stub().url("length")).finish_reason == backend::FinishReason::length);

  auto r = request("the prompt");
  r.max_new_tokens = 77;
  r.temperature = 0.5;
  r.stop_markers = {"</s>", "###"};
  const auto sent = nlohmann::json::parse(backend::complete(r, stub().url("echo")).text);
  CHECK(sent["prompt"] == "the prompt");
  CHECK(sent["n_predict"] == 77);
  CHECK(sent["temperature"] == 0.5);
  CHECK(sent["stop"] == nlohmann::json::array({"</s>", "###"}));
}

TEST_CASE("complete: error variants carry endpoint and cause") {
  CHECK(kind_of_failure([] { backend::complete(request("x"), stub().url("fail")); }) == ErrorKind::http_status);
  CHECK(kind_of_failure([] { backend::complete(request("x"), stub().url("garbage")); }) == ErrorKind::malformed_body);
  CHECK(kind_of_failure([] { backend::complete(request("x"), stub().url("nocontent")); }) == ErrorKind::malformed_body);
  CHECK(kind_of_failure([] {
          backend::complete(request("x"), stub().url("slow"), std::chrono::milliseconds(200));
        }) == ErrorKind::timeout);

  try {
    backend::complete(request("x"), stub().url("fail"));
  } catch (const BackendError& error) {
    CHECK(error.endpoint() == stub().url("fail"));
    CHECK(error.cause() == "HTTP 500");
  }
}

TEST_CASE("complete: no listener is a connection error") {
  const int port = closed_port();
  const auto url = "http://127.0.0.1:" + std::to_string(port);
  CHECK(kind_of_failure([&] { backend::complete(request("x"), url, std::chrono::milliseconds(500)); }) ==
        ErrorKind::connection);
}

TEST_CASE("complete: invalid requests and endpoints") {
  auto r = request("x");
  r.max_new_tokens = 0;
  CHECK(kind_of_failure([&] { backend::complete(r, stub().url("ok")); }) == ErrorKind::invalid_request);
  r = request("x");
  r.temperature = -1;
  CHECK(kind_of_failure([&] { backend::complete(r, stub().url("ok")); }) == ErrorKind::invalid_request);
  CHECK(kind_of_failure([] { backend::complete(request("x"), "localhost:8080"); }) == ErrorKind::invalid_request);
}

TEST_CASE("complete: concurrent requests") {
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      if (backend::complete(request("x"), stub().url("ok")).text == "ok") ++ok;
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 8);
}

TEST_CASE("endpoint resolution honours YAMLSMITH_ENDPOINT") {
  ::unsetenv("YAMLSMITH_ENDPOINT");
  CHECK(backend::resolve_endpoint("http://a:1") == "http://a:1");
  ::setenv("YAMLSMITH_ENDPOINT", "http://b:2", 1);
  CHECK(backend::resolve_endpoint("http://a:1") == "http://b:2");
  ::setenv("YAMLSMITH_ENDPOINT", "", 1);
  CHECK(backend::resolve_endpoint("http://a:1") == "http://a:1");
  ::unsetenv("YAMLSMITH_ENDPOINT");
}

TEST_CASE("digest is hex SHA-256 of the exact bytes") {
  CHECK(backend::prompt_digest("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(backend::prompt_digest("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(backend::prompt_digest("abc") != backend::prompt_digest("abc "));
}

TEST_CASE("shipped fixture file has one record per Tir") {
  const auto& store = testing::corpus();
  REQUIRE(store.size() == 8);
  std::map<int, int> per_annexe;
  for (const auto& r : store.records()) ++per_annexe[r.annexe];
  CHECK(per_annexe == std::map<int, int>{{1, 1}, {2, 1}, {3, 2}, {4, 3}, {5, 1}});
}

TEST_CASE("publishing escapes are unescaped at load time") {
  const auto& r = testing::record("annexe4.tir3");
  CHECK(r.response.find("\\'") == std::string::npos);
  CHECK(r.response.find("Here's a detailed plan") != std::string::npos);
  CHECK(r.response.find("\t+ mountpoint: \"/\"") != std::string::npos);
  CHECK(backend::unescape_transcript(R"(a\'b\tc\nd\\)") == "a'b\tc\\nd\\\\");
}

TEST_CASE("load_transcripts edge cases") {
  CHECK(backend::parse_transcripts("", "empty").empty());
  CHECK(backend::parse_transcripts("\n\n", "blank").empty());
  CHECK_THROWS_AS(backend::load_transcripts("/nonexistent/file.jsonl"), BackendError);
  try {
    backend::parse_transcripts(R"({"annexe":1,"tir":1,"model":"m","prompt":"p"})", "f.jsonl");
    FAIL("expected malformed record");
  } catch (const BackendError& error) {
    CHECK(error.kind() == ErrorKind::malformed_record);
    CHECK(error.cause().find("prompt without a model response") != std::string::npos);
  }
  CHECK(kind_of_failure([] { backend::parse_transcripts("{not json}\n", "f"); }) == ErrorKind::malformed_record);
  CHECK(kind_of_failure([] { backend::load_transcripts("/nonexistent"); }) == ErrorKind::io);
}

TEST_CASE("replay returns the recorded response verbatim") {
  const auto& r = testing::record("annexe3.tir1");
  auto req = request(r.prompt);
  req.model_name = "alpaca-13b";
  const auto response = backend::replay_complete(req, testing::corpus());
  CHECK(response.text == r.response);
  CHECK(response.finish_reason == backend::FinishReason::stop);
  CHECK(response.latency_ms == 0);
  CHECK(backend::replay_complete(req, testing::corpus()).text == response.text);
}

TEST_CASE("replay disambiguates repeated prompts by model and sample") {
  const auto& store = testing::corpus();
  auto req = request(testing::record("annexe4.tir1").prompt);
  for (std::size_t sample = 0; sample < 3; ++sample) {
    req.sample = sample;
    CHECK(backend::replay_complete(req, store).text ==
          testing::record("annexe4.tir" + std::to_string(sample + 1)).response);
  }
  req.sample = 3;
  CHECK(kind_of_failure([&] { backend::replay_complete(req, store); }) == ErrorKind::not_found);

  // Annexe 2 and Annexe 3 Tir 1 share their prompt; the model picks the record.
  req = request(testing::record("annexe2.tir1").prompt);
  req.model_name = "alpaca-13b";
  CHECK(backend::replay_complete(req, store).text == testing::record("annexe3.tir1").response);
  req.model_name = "llama-13b";
  CHECK(backend::replay_complete(req, store).text == testing::record("annexe2.tir1").response);

  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& r = store.records()[i];
    auto exact = request(r.prompt);
    exact.model_name = r.model;
    exact.sample = store.sample_index(i);
    CHECK(backend::replay_complete(exact, store).text == r.response);
  }
}

TEST_CASE("replay miss names the digest") {
  try {
    backend::replay_complete(request("unknown prompt"), testing::corpus());
    FAIL("expected not_found");
  } catch (const BackendError& error) {
    CHECK(error.kind() == ErrorKind::not_found);
    CHECK(error.cause().find(backend::prompt_digest("unknown prompt")) != std::string::npos);
  }
}
