#include "canvascot/chat.hpp"

#include <thread>

#include "canvascot/digest.hpp"
#include "canvascot/image_io.hpp"
#include "httplib.h"
#include "json_codec.hpp"

namespace canvascot {

using codec::json;

Result<std::string, SolverError> ScriptedSolver::respond(const RenderedPrompt&) {
  if (next_ < responses_.size()) return responses_[next_++];
  if (repeat_last_ && !responses_.empty()) {
    ++next_;
    return responses_.back();
  }
  return SolverError{"script exhausted after " + std::to_string(responses_.size()) + " responses"};
}

std::string Cassette::to_json() const {
  json j;
  j["version"] = 1;
  json e = json::object();
  for (const auto& [digest, text] : entries) e[digest] = text;
  j["entries"] = std::move(e);
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

Result<Cassette, std::string> Cassette::from_json(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::string("cassette is not a JSON object");
  auto e = j.find("entries");
  if (e == j.end() || !e->is_object()) return std::string("cassette has no \"entries\" object");
  Cassette c;
  for (const auto& [digest, value] : e->items()) {
    if (!value.is_string()) return "cassette entry " + digest + " is not a string";
    c.entries[digest] = value.get<std::string>();
  }
  return c;
}

Result<Cassette, std::string> Cassette::load(const std::filesystem::path& path) {
  auto text = read_file(path);
  if (!text) return text.error().message;
  auto c = from_json(text.value());
  if (!c) return path.string() + ": " + c.error();
  return c;
}

std::optional<std::string> Cassette::save(const std::filesystem::path& path) const { return write_file(path, to_json()); }

Result<std::string, SolverError> CassetteSolver::respond(const RenderedPrompt& prompt) {
  auto it = cassette_.entries.find(prompt.digest);
  if (it == cassette_.entries.end()) return SolverError{"no cassette entry for context " + prompt.digest};
  return it->second;
}

Result<std::string, SolverError> RecordingSolver::respond(const RenderedPrompt& prompt) {
  auto r = inner_.respond(prompt);
  if (r) cassette_.entries[prompt.digest] = r.value();
  return r;
}

// ---------------------------------------------------------------------------

HttpChatClient::HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {
  sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string HttpChatClient::request_body(const std::vector<ChatMessage>& messages) const {
  json body;
  body["model"] = config_.model;
  body["temperature"] = config_.temperature;
  if (config_.max_tokens > 0) body["max_tokens"] = config_.max_tokens;
  json msgs = json::array();
  for (const auto& m : messages) {
    // Tool responses travel as user messages; there is no native tool call id.
    std::string role = m.role == "tool" ? "user" : m.role;
    if (m.images.empty()) {
      msgs.push_back({{"role", role}, {"content", m.text}});
      continue;
    }
    json parts = json::array();
    parts.push_back({{"type", "text"}, {"text", m.text}});
    for (const auto& img : m.images) {
      parts.push_back({{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(img.png)}}}});
    }
    msgs.push_back({{"role", role}, {"content", std::move(parts)}});
  }
  body["messages"] = std::move(msgs);
  return codec::dump(body);
}

Result<std::string, SolverError> HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
  // scheme://host[:port]/path
  const std::string& url = config_.endpoint;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return SolverError{"endpoint is not an absolute URL: " + url};
  auto path_start = url.find('/', scheme_end + 3);
  std::string origin = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  if (!client.is_valid()) return SolverError{"unsupported endpoint " + origin};
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const std::string body = request_body(messages);
  std::string last_error;
  auto delay = config_.backoff;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleep(delay);
      delay *= 2;
    }
    ++attempts_;
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      return SolverError{"HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 512)};
    }
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) return SolverError{"response is not JSON"};
    try {
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (content.is_string()) return content.get<std::string>();
      // Some servers return content parts.
      std::string text;
      for (const auto& part : content) {
        if (part.is_object() && part.value("type", "") == "text") text += part.value("text", "");
      }
      return text;
    } catch (const json::exception& e) {
      return SolverError{std::string("unexpected response shape: ") + e.what()};
    }
  }
  return SolverError{"gave up after " + std::to_string(config_.max_retries + 1) + " attempts; last error: " + last_error};
}

}  // namespace canvascot
