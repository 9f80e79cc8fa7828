#include <atomic>
#include <thread>

#include "canvascot/chat.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

using namespace canvascot;
using namespace std::chrono_literals;

namespace {

// Local chat-completions endpoint with a scripted sequence of replies.
class FakeServer {
 public:
  struct Reply {
    int status;
    std::string body;
    std::chrono::milliseconds delay{0};
  };

  explicit FakeServer(std::vector<Reply> replies) : replies_(std::move(replies)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::size_t k = hits_++;
      {
        std::lock_guard<std::mutex> lock(mu_);
        bodies_.push_back(req.body);
        auth_ = req.get_header_value("Authorization");
      }
      const Reply& r = replies_[std::min(k, replies_.size() - 1)];
      if (r.delay.count()) std::this_thread::sleep_for(r.delay);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  std::size_t hits() const { return hits_; }
  std::string body(std::size_t k) {
    std::lock_guard<std::mutex> lock(mu_);
    return bodies_.at(k);
  }
  std::string auth() {
    std::lock_guard<std::mutex> lock(mu_);
    return auth_;
  }

 private:
  httplib::Server server_;
  std::vector<Reply> replies_;
  std::atomic<std::size_t> hits_{0};
  std::mutex mu_;
  std::vector<std::string> bodies_;
  std::string auth_;
  int port_ = 0;
  std::thread thread_;
};

std::string ok_body(const std::string& text) {
  nlohmann::json j;
  j["choices"] = nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}});
  return j.dump();
}

HttpChatConfig config_for(const std::string& url) {
  HttpChatConfig c;
  c.endpoint = url;
  c.model = "test-model";
  c.api_key = "sk-test";
  c.backoff = 10ms;
  c.max_retries = 2;
  c.timeout = 2000ms;
  return c;
}

std::vector<ChatMessage> hello() { return {{"system", "be brief", {}}, {"user", "hi", {}}}; }

}  // namespace

TEST_CASE("successful completion") {
  FakeServer server({{200, ok_body("<answer>1</answer>")}});
  HttpChatClient client(config_for(server.url()));
  auto r = client.complete(hello());
  REQUIRE(r.ok());
  CHECK(r.value() == "<answer>1</answer>");
  CHECK(client.attempts() == 1);
  CHECK(server.auth() == "Bearer sk-test");
  auto body = nlohmann::json::parse(server.body(0));
  CHECK(body["model"] == "test-model");
  CHECK(body["temperature"] == 0);
  CHECK_FALSE(body.contains("max_tokens"));
  CHECK(body["messages"][1]["content"] == "hi");
}

TEST_CASE("transient failures are retried with doubling backoff") {
  FakeServer server({{503, "busy"}, {429, "slow down"}, {200, ok_body("done")}});
  HttpChatClient client(config_for(server.url()));
  std::vector<std::chrono::milliseconds> waits;
  client.sleep = [&](std::chrono::milliseconds d) { waits.push_back(d); };
  auto r = client.complete(hello());
  REQUIRE(r.ok());
  CHECK(r.value() == "done");
  CHECK(server.hits() == 3);
  CHECK(waits == std::vector<std::chrono::milliseconds>{10ms, 20ms});
}

TEST_CASE("retries run out") {
  FakeServer server({{500, "oops"}});
  HttpChatClient client(config_for(server.url()));
  client.sleep = [](std::chrono::milliseconds) {};
  auto r = client.complete(hello());
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().message == "gave up after 3 attempts; last error: HTTP 500");
  CHECK(server.hits() == 3);
}

TEST_CASE("client errors are not retried") {
  FakeServer server({{401, "{\"error\":\"bad key\"}"}});
  HttpChatClient client(config_for(server.url()));
  auto r = client.complete(hello());
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().message.rfind("HTTP 401: ", 0) == 0);
  CHECK(server.hits() == 1);
}

TEST_CASE("content parts are joined") {
  FakeServer server({{200, R"({"choices":[{"message":{"content":[{"type":"text","text":"a"},{"type":"text","text":"b"}]}}]})"}});
  HttpChatClient client(config_for(server.url()));
  CHECK(client.complete(hello()).value() == "ab");
}

TEST_CASE("malformed responses") {
  FakeServer server({{200, "not json"}, {200, R"({"choices":[]})"}});
  HttpChatClient client(config_for(server.url()));
  CHECK(client.complete(hello()).error().message == "response is not JSON");
  CHECK(client.complete(hello()).error().message.rfind("unexpected response shape", 0) == 0);
}

TEST_CASE("slow server times out") {
  FakeServer server({{200, ok_body("late"), 600ms}});
  auto cfg = config_for(server.url());
  cfg.timeout = 150ms;
  cfg.max_retries = 0;
  HttpChatClient client(cfg);
  auto r = client.complete(hello());
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().message.find("transport error") != std::string::npos);
}

TEST_CASE("endpoint down") {
  int port;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  auto cfg = config_for("http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions");
  cfg.max_retries = 1;
  HttpChatClient client(cfg);
  client.sleep = [](std::chrono::milliseconds) {};
  auto r = client.complete(hello());
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().message.rfind("gave up after 2 attempts; last error: transport error", 0) == 0);
  CHECK(client.attempts() == 2);

  cfg.endpoint = "localhost:8080";
  CHECK(HttpChatClient(cfg).complete(hello()).error().message.find("not an absolute URL") != std::string::npos);
}

TEST_CASE("request body shape") {
  auto cfg = config_for("http://x/y");
  cfg.max_tokens = 256;
  cfg.temperature = 0.5;
  HttpChatClient client(cfg);
  ChatImage img{"\x89PNG", "d"};
  auto body = nlohmann::json::parse(client.request_body({{"user", "look", {img}}, {"tool", "<tool_response/>", {}}}));
  CHECK(body["max_tokens"] == 256);
  CHECK(body["temperature"] == 0.5);
  auto parts = body["messages"][0]["content"];
  REQUIRE(parts.size() == 2);
  CHECK(parts[0]["type"] == "text");
  CHECK(parts[1]["image_url"]["url"] == "data:image/png;base64,iVBORw==");
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["messages"][1]["content"] == "<tool_response/>");
}

TEST_CASE("scripted solver") {
  RenderedPrompt p;
  ScriptedSolver once({"a", "b"});
  CHECK(once.respond(p).value() == "a");
  CHECK(once.respond(p).value() == "b");
  CHECK(once.respond(p).error().message == "script exhausted after 2 responses");
  ScriptedSolver loop({"a", "b"}, true);
  (void)loop.respond(p);
  (void)loop.respond(p);
  CHECK(loop.respond(p).value() == "b");
}

TEST_CASE("cassette record and playback") {
  int n = 0;
  FunctionSolver inner([&](const RenderedPrompt& p) -> Result<std::string, SolverError> {
    if (p.digest == "bad") return SolverError{"nope"};
    return "reply " + std::to_string(++n);
  });
  RecordingSolver rec(inner);
  RenderedPrompt a, b, bad;
  a.digest = "aaa";
  b.digest = "bbb";
  bad.digest = "bad";
  CHECK(rec.respond(a).value() == "reply 1");
  CHECK(rec.respond(b).value() == "reply 2");
  CHECK_FALSE(rec.respond(bad).ok());
  CHECK(rec.cassette().entries.size() == 2);

  std::string json = rec.cassette().to_json();
  auto back = Cassette::from_json(json);
  REQUIRE(back.ok());
  CHECK(back->entries == rec.cassette().entries);
  CHECK(back->to_json() == json);

  CassetteSolver play(back.value());
  CHECK(play.respond(b).value() == "reply 2");
  CHECK(play.respond(a).value() == "reply 1");
  RenderedPrompt other;
  other.digest = "ccc";
  CHECK(play.respond(other).error().message == "no cassette entry for context ccc");

  CHECK_FALSE(Cassette::from_json("[]").ok());
  CHECK_FALSE(Cassette::from_json("{\"version\":1,\"entries\":{\"a\":3}}").ok());
  CHECK_FALSE(Cassette::load("/nonexistent/cassette.json").ok());
}
