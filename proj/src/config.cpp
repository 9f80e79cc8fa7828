#include "canvascot/config.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "canvascot/image_io.hpp"

namespace canvascot {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
std::optional<T> number(std::string_view s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> boolean(std::string_view s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  return std::nullopt;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Http: return "http";
    case BackendKind::Cassette: return "cassette";
    case BackendKind::Script: return "script";
  }
  return "cassette";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) {
  if (name == "http") return BackendKind::Http;
  if (name == "cassette") return BackendKind::Cassette;
  if (name == "script") return BackendKind::Script;
  return std::nullopt;
}

std::string ConfigError::describe() const {
  if (line == 0) return file + ": " + message;
  return file + ":" + std::to_string(line) + ": " + message;
}

std::optional<std::string> set_config_value(CliConfig& c, std::string_view key, std::string_view value) {
  const std::string v(value);
  auto need_int = [&](int& slot, int lo, int hi) -> std::optional<std::string> {
    auto n = number<int>(value);
    if (!n || *n < lo || *n > hi) {
      return "\"" + std::string(key) + "\" expects an integer in " + std::to_string(lo) + ".." + std::to_string(hi) +
             ", got \"" + v + "\"";
    }
    slot = *n;
    return std::nullopt;
  };
  auto need_double = [&](double& slot, double lo, double hi) -> std::optional<std::string> {
    auto n = number<double>(value);
    if (!n || !(*n >= lo && *n <= hi)) {
      return "\"" + std::string(key) + "\" expects a number in " + fmt(lo) + ".." + fmt(hi) + ", got \"" + v + "\"";
    }
    slot = *n;
    return std::nullopt;
  };
  auto need_ms = [&](std::chrono::milliseconds& slot) -> std::optional<std::string> {
    int ms = 0;
    if (auto e = need_int(ms, 0, 3600000)) return e;
    slot = std::chrono::milliseconds(ms);
    return std::nullopt;
  };

  if (key == "budget") return need_int(c.episode.budget, 1, 1000);
  if (key == "max_actions_per_turn") return need_int(c.episode.max_actions_per_turn, 1, 1000);
  if (key == "canvas_width") return need_double(c.episode.canvas_width, 16, 4096);
  if (key == "temperature") {
    if (auto e = need_double(c.episode.temperature, 0, 2)) return e;
    c.http.temperature = c.episode.temperature;
    return std::nullopt;
  }
  if (key == "critic") {
    auto k = parse_critic_kind(value);
    if (!k) return "\"critic\" expects diff, llm or none, got \"" + v + "\"";
    c.episode.critic = *k;
    return std::nullopt;
  }
  if (key == "critic_threshold") return need_double(c.episode.diff.threshold, 0, 1);
  if (key == "critic_tolerance") return need_int(c.episode.diff.tolerance, 0, 255);
  if (key == "critic_grid") return need_int(c.episode.diff.grid, 1, 64);
  if (key == "critic_endpoint") return c.critic_endpoint = v, std::nullopt;
  if (key == "critic_model") return c.critic_model = v, std::nullopt;
  if (key == "token_method") {
    auto m = parse_token_method(value);
    if (!m) return "\"token_method\" expects word-punct or code-points, got \"" + v + "\"";
    c.episode.token_method = *m;
    return std::nullopt;
  }
  if (key == "backend") {
    auto b = parse_backend_kind(value);
    if (!b) return "\"backend\" expects http, cassette or script, got \"" + v + "\"";
    c.backend = *b;
    return std::nullopt;
  }
  if (key == "endpoint") return c.http.endpoint = v, std::nullopt;
  if (key == "model") return c.http.model = v, std::nullopt;
  if (key == "timeout_ms") return need_ms(c.http.timeout);
  if (key == "backoff_ms") return need_ms(c.http.backoff);
  if (key == "max_retries") return need_int(c.http.max_retries, 0, 20);
  if (key == "max_tokens") return need_int(c.http.max_tokens, 0, 1000000);
  if (key == "cassette") return c.cassette = v, std::nullopt;
  if (key == "script") return c.script = v, std::nullopt;
  if (key == "record") {
    auto b = boolean(value);
    if (!b) return "\"record\" expects true or false, got \"" + v + "\"";
    c.record = *b;
    return std::nullopt;
  }
  if (key == "out") return c.out = v, std::nullopt;
  if (key == "jobs") return need_int(c.jobs, 1, 256);
  if (key == "api_key" || key == "token" || key == "auth") {
    return "\"" + std::string(key) + "\" is not read from files; set " + kApiKeyEnv + " instead";
  }
  return "unknown key \"" + std::string(key) + "\"";
}

Result<CliConfig, ConfigError> parse_config(std::string_view text, std::string_view filename, CliConfig base) {
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) return ConfigError{std::string(filename), line_no, "expected key = value"};
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) return ConfigError{std::string(filename), line_no, "missing key before '='"};
    if (auto err = set_config_value(base, key, value)) return ConfigError{std::string(filename), line_no, *err};
  }
  return base;
}

Result<CliConfig, ConfigError> load_config(const std::filesystem::path& path, CliConfig base) {
  auto text = read_file(path);
  if (!text) return ConfigError{path.string(), 0, text.error().message};
  return parse_config(text.value(), path.string(), std::move(base));
}

void apply_environment(CliConfig& config) {
  if (const char* key = std::getenv(kApiKeyEnv); key && *key) config.http.api_key = key;
}

std::string describe_config(const CliConfig& c) {
  std::string out;
  auto line = [&](std::string_view k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
  line("backend", std::string(to_string(c.backend)));
  line("endpoint", c.http.endpoint);
  line("model", c.http.model);
  line("api_key", c.http.api_key.empty() ? "(unset)" : "(redacted)");
  line("temperature", fmt(c.episode.temperature));
  line("timeout_ms", std::to_string(c.http.timeout.count()));
  line("max_retries", std::to_string(c.http.max_retries));
  line("backoff_ms", std::to_string(c.http.backoff.count()));
  line("max_tokens", std::to_string(c.http.max_tokens));
  line("budget", std::to_string(c.episode.budget));
  line("max_actions_per_turn", std::to_string(c.episode.max_actions_per_turn));
  line("canvas_width", fmt(c.episode.canvas_width));
  line("critic", std::string(to_string(c.episode.critic)));
  line("critic_threshold", fmt(c.episode.diff.threshold));
  line("critic_tolerance", std::to_string(c.episode.diff.tolerance));
  line("critic_grid", std::to_string(c.episode.diff.grid));
  line("critic_endpoint", c.critic_endpoint);
  line("critic_model", c.critic_model);
  line("token_method", std::string(to_string(c.episode.token_method)));
  line("cassette", c.cassette ? c.cassette->string() : "");
  line("script", c.script ? c.script->string() : "");
  line("record", c.record ? "true" : "false");
  line("out", c.out.string());
  line("jobs", std::to_string(c.jobs));
  return out;
}

}  // namespace canvascot
