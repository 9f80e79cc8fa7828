#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "canvascot/chat.hpp"
#include "canvascot/orchestrator.hpp"
#include "canvascot/result.hpp"

namespace canvascot {

/// Environment variable holding the bearer token. Never read from files.
inline constexpr const char* kApiKeyEnv = "CANVASCOT_API_KEY";

enum class BackendKind { Http, Cassette, Script };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view name);

struct CliConfig {
  EpisodeConfig episode;
  BackendKind backend = BackendKind::Cassette;
  HttpChatConfig http;         ///< solver endpoint
  std::string critic_endpoint; ///< empty: same as the solver
  std::string critic_model;    ///< empty: same as the solver
  std::optional<std::filesystem::path> cassette;
  std::optional<std::filesystem::path> script;  ///< JSON array of responses
  bool record = false;  ///< write the http responses as a cassette next to the trajectory
  std::filesystem::path out = "out";
  int jobs = 1;
};

struct ConfigError {
  std::string file;
  std::size_t line = 0;
  std::string message;

  std::string describe() const;  ///< "file:line: message"
};

/// `key = value` lines; `#` starts a comment; blank lines ignored. Keys are
/// applied on top of `base`. Unknown keys and bad values are errors.
Result<CliConfig, ConfigError> parse_config(std::string_view text, std::string_view filename, CliConfig base = {});
Result<CliConfig, ConfigError> load_config(const std::filesystem::path& path, CliConfig base = {});

/// Sets one key; the error text has no location.
std::optional<std::string> set_config_value(CliConfig& config, std::string_view key, std::string_view value);

/// Fills http.api_key from the environment.
void apply_environment(CliConfig& config);

/// Every resolved setting, one `key = value` per line, secrets redacted.
std::string describe_config(const CliConfig& config);

}  // namespace canvascot
