#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "canvascot/context.hpp"
#include "canvascot/result.hpp"

namespace canvascot {

struct SolverError {
  std::string message;
};

/// Produces the raw model text for one rendered context.
class Solver {
 public:
  virtual ~Solver() = default;
  virtual Result<std::string, SolverError> respond(const RenderedPrompt& prompt) = 0;
};

/// Returns fixed responses in order. When the script runs out it repeats the
/// last entry if `repeat_last`, otherwise fails.
class ScriptedSolver : public Solver {
 public:
  explicit ScriptedSolver(std::vector<std::string> responses, bool repeat_last = false)
      : responses_(std::move(responses)), repeat_last_(repeat_last) {}
  Result<std::string, SolverError> respond(const RenderedPrompt& prompt) override;
  std::size_t calls() const { return next_; }

 private:
  std::vector<std::string> responses_;
  bool repeat_last_;
  std::size_t next_ = 0;
};

class FunctionSolver : public Solver {
 public:
  using Fn = std::function<Result<std::string, SolverError>(const RenderedPrompt&)>;
  explicit FunctionSolver(Fn fn) : fn_(std::move(fn)) {}
  Result<std::string, SolverError> respond(const RenderedPrompt& prompt) override { return fn_(prompt); }

 private:
  Fn fn_;
};

/// contextDigest -> response text.
struct Cassette {
  std::map<std::string, std::string> entries;

  std::string to_json() const;
  static Result<Cassette, std::string> from_json(std::string_view text);
  static Result<Cassette, std::string> load(const std::filesystem::path& path);
  std::optional<std::string> save(const std::filesystem::path& path) const;
};

/// Serves recorded responses. A context with no entry is a solver failure.
class CassetteSolver : public Solver {
 public:
  explicit CassetteSolver(Cassette cassette) : cassette_(std::move(cassette)) {}
  Result<std::string, SolverError> respond(const RenderedPrompt& prompt) override;

 private:
  Cassette cassette_;
};

/// Passes through to another solver and records every response.
class RecordingSolver : public Solver {
 public:
  explicit RecordingSolver(Solver& inner) : inner_(inner) {}
  Result<std::string, SolverError> respond(const RenderedPrompt& prompt) override;
  const Cassette& cassette() const { return cassette_; }

 private:
  Solver& inner_;
  Cassette cassette_;
};

// ---------------------------------------------------------------------------
// Chat-completion transport

/// Sends an ordered message list, returns the assistant text.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual Result<std::string, SolverError> complete(const std::vector<ChatMessage>& messages) = 0;
};

struct HttpChatConfig {
  std::string endpoint;  ///< full URL, e.g. https://host/v1/chat/completions
  std::string model;
  std::string api_key;   ///< sent as a bearer token when non-empty
  double temperature = 0;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};  ///< doubled after each failed attempt
  int max_tokens = 0;                      ///< 0 leaves it to the server
};

/// OpenAI-style chat-completions client. Retries transport errors, 429 and
/// 5xx with exponential backoff; other statuses fail at once.
class HttpChatClient : public ChatBackend {
 public:
  explicit HttpChatClient(HttpChatConfig config);
  Result<std::string, SolverError> complete(const std::vector<ChatMessage>& messages) override;

  /// JSON request body for the given messages (exposed for tests).
  std::string request_body(const std::vector<ChatMessage>& messages) const;
  std::size_t attempts() const { return attempts_; }

  /// Injected between retries; defaults to sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;

 private:
  HttpChatConfig config_;
  std::size_t attempts_ = 0;
};

/// Solver that forwards the rendered context to a chat backend.
class ChatSolver : public Solver {
 public:
  explicit ChatSolver(ChatBackend& backend) : backend_(backend) {}
  Result<std::string, SolverError> respond(const RenderedPrompt& prompt) override {
    return backend_.complete(prompt.messages);
  }

 private:
  ChatBackend& backend_;
};

}  // namespace canvascot
