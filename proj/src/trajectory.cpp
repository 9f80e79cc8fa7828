#include "canvascot/trajectory.hpp"

#include "canvascot/digest.hpp"
#include "canvascot/image_io.hpp"
#include "json_codec.hpp"

namespace canvascot {

using codec::json;

namespace {

json opt_string(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::string> string_or_null(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

json config_to_json(const EpisodeConfig& c) {
  json j;
  j["budget"] = c.budget;
  j["maxActionsPerTurn"] = c.max_actions_per_turn;
  j["canvasWidth"] = c.canvas_width;
  j["temperature"] = c.temperature;
  j["critic"] = std::string(to_string(c.critic));
  j["criticThreshold"] = c.diff.threshold;
  j["criticTolerance"] = c.diff.tolerance;
  j["criticGrid"] = c.diff.grid;
  j["tokenMethod"] = std::string(to_string(c.token_method));
  return j;
}

EpisodeConfig config_from(const json& j) {
  EpisodeConfig c;
  c.budget = j.value("budget", c.budget);
  c.max_actions_per_turn = j.value("maxActionsPerTurn", c.max_actions_per_turn);
  c.canvas_width = j.value("canvasWidth", c.canvas_width);
  c.temperature = j.value("temperature", c.temperature);
  if (auto k = parse_critic_kind(j.value("critic", std::string("diff")))) c.critic = *k;
  c.diff.threshold = j.value("criticThreshold", c.diff.threshold);
  c.diff.tolerance = j.value("criticTolerance", c.diff.tolerance);
  c.diff.grid = j.value("criticGrid", c.diff.grid);
  if (auto m = parse_token_method(j.value("tokenMethod", std::string("word-punct")))) c.token_method = *m;
  return c;
}

TrajectoryStep step_from(const json& j) {
  TrajectoryStep s;
  s.index = j.at("index").get<int>();
  s.context_digest = j.at("contextDigest").get<std::string>();
  s.turn = codec::turn_from(j.at("turn"));
  for (const auto& a : j.at("actions")) {
    auto action = codec::action_from(a.at("action"));
    if (!action) throw std::runtime_error("bad action: " + action.error());
    s.actions.push_back(ActionRecord{std::move(action.value()), a.at("accepted").get<bool>(),
                                     string_or_null(a, "diagnostic"), a.at("revision").get<std::uint64_t>()});
  }
  s.state_snapshot = j.at("stateSnapshot").get<std::string>();
  s.render_digest = j.at("renderDigest").get<std::string>();
  if (auto it = j.find("critique"); it != j.end() && !it->is_null()) {
    auto c = codec::critique_from(*it);
    if (!c) throw std::runtime_error("bad critique: " + c.error());
    s.critique = std::move(c.value());
  }
  s.tokens_in = codec::token_count_from(j.at("tokensIn"));
  s.tokens_out = codec::token_count_from(j.at("tokensOut"));
  s.raw_output = j.at("rawOutput").get<std::string>();
  if (auto it = j.find("notices"); it != j.end()) s.notices = it->get<std::vector<std::string>>();
  s.protocol_error = string_or_null(j, "protocolError");
  return s;
}

std::string short_digest(std::string_view text) { return "sha256:" + sha256_hex(text); }

}  // namespace

TrajectoryHeader make_header(const Task& task, const EpisodeConfig& config) {
  return TrajectoryHeader{task.instruction, task.reference, task.seed, config};
}

TrajectoryEnd make_end(const EpisodeResult& result) {
  return TrajectoryEnd{result.status, result.answer, static_cast<int>(result.trajectory.size()), result.failure};
}

std::string header_line(const TrajectoryHeader& h) {
  json j;
  j["type"] = "header";
  j["version"] = 1;
  j["instruction"] = h.instruction;
  if (h.reference) {
    std::string png = encode_png(*h.reference);
    j["referenceDigest"] = sha256_hex(png);
    j["referenceSize"] = {h.reference->width, h.reference->height};
    j["referencePng"] = base64_encode(png);
  } else {
    j["referenceDigest"] = nullptr;
  }
  j["seed"] = opt_string(h.seed);
  j["config"] = config_to_json(h.config);
  return codec::dump(j);
}

std::string step_line(const TrajectoryStep& s) {
  json j;
  j["type"] = "step";
  j["index"] = s.index;
  j["contextDigest"] = s.context_digest;
  j["turn"] = codec::to_json(s.turn);
  json actions = json::array();
  for (const auto& a : s.actions) {
    actions.push_back({{"action", codec::action_to_json(a.action)},
                       {"accepted", a.accepted},
                       {"diagnostic", opt_string(a.diagnostic)},
                       {"revision", a.revision}});
  }
  j["actions"] = std::move(actions);
  j["stateSnapshot"] = s.state_snapshot;
  j["renderDigest"] = s.render_digest;
  j["critique"] = s.critique ? codec::to_json(*s.critique) : json(nullptr);
  j["tokensIn"] = codec::to_json(s.tokens_in);
  j["tokensOut"] = codec::to_json(s.tokens_out);
  j["rawOutput"] = s.raw_output;
  j["notices"] = s.notices;
  j["protocolError"] = opt_string(s.protocol_error);
  return codec::dump(j);
}

std::string end_line(const TrajectoryEnd& e) {
  json j;
  j["type"] = "end";
  j["status"] = std::string(to_string(e.status));
  j["answer"] = opt_string(e.answer);
  j["steps"] = e.steps;
  if (e.failure) j["failure"] = *e.failure;
  return codec::dump(j);
}

std::string to_jsonl(const Trajectory& t) {
  std::string out = header_line(t.header) + "\n";
  for (const auto& s : t.steps) out += step_line(s) + "\n";
  if (t.end) out += end_line(*t.end) + "\n";
  return out;
}

Result<Trajectory, TrajectoryError> parse_trajectory(std::string_view text) {
  Trajectory t;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    auto fail = [&](std::string msg) { return TrajectoryError{line_no, std::move(msg)}; };

    json j = json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) return fail("not a JSON object");
    std::string type = j.value("type", "");
    if (!have_header && type != "header") return fail("first line must be the header");
    if (t.end) return fail("content after the end line");
    try {
      if (type == "header") {
        if (have_header) return fail("second header");
        have_header = true;
        t.header.instruction = j.at("instruction").get<std::string>();
        t.header.seed = string_or_null(j, "seed");
        if (auto it = j.find("referencePng"); it != j.end() && it->is_string()) {
          auto png = base64_decode(it->get<std::string>());
          if (!png) return fail("referencePng is not base64");
          auto img = decode_png(*png);
          if (!img) return fail("referencePng: " + img.error());
          if (auto d = string_or_null(j, "referenceDigest"); d && *d != sha256_hex(*png)) {
            return fail("referenceDigest does not match referencePng");
          }
          t.header.reference = std::move(img.value());
        }
        if (auto it = j.find("config"); it != j.end()) t.header.config = config_from(*it);
      } else if (type == "step") {
        t.steps.push_back(step_from(j));
      } else if (type == "end") {
        TrajectoryEnd e;
        auto status = parse_episode_status(j.at("status").get<std::string>());
        if (!status) return fail("unknown status");
        e.status = *status;
        e.answer = string_or_null(j, "answer");
        e.steps = j.at("steps").get<int>();
        e.failure = string_or_null(j, "failure");
        t.end = std::move(e);
      } else {
        return fail("unknown line type \"" + type + "\"");
      }
    } catch (const std::exception& e) {
      return fail(e.what());
    }
  }
  if (!have_header) return TrajectoryError{line_no, "empty trajectory"};
  return t;
}

Result<Trajectory, TrajectoryError> load_trajectory(const std::filesystem::path& path) {
  auto text = read_file(path);
  if (!text) return TrajectoryError{0, text.error().message};
  auto t = parse_trajectory(text.value());
  if (!t) return TrajectoryError{t.error().line, path.string() + ":" + std::to_string(t.error().line) + ": " + t.error().message};
  return t;
}

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path) {
  file_ = std::fopen(path.string().c_str(), "wb");
}

TrajectoryWriter::~TrajectoryWriter() {
  if (file_) std::fclose(file_);
}

void TrajectoryWriter::write(const std::string& line) {
  if (!file_) return;
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fputc('\n', file_) == EOF ||
      std::fflush(file_) != 0) {
    failed_ = true;
  }
}

std::string DigestMismatch::describe() const {
  return "DigestMismatch at step " + std::to_string(step) + " (" + what + "): expected " + expected + ", got " + actual;
}

Result<ReplaySummary, DigestMismatch> replay(const Trajectory& t) {
  const EpisodeConfig& config = t.header.config;
  const RenderOptions ropts = config.render_options();
  DomState state = new_state(config.state_options());
  std::vector<HistoryEntry> history;

  if (t.header.seed) {
    Action seed = InsertAction{*t.header.seed, std::string(kRootId), std::nullopt};
    if (auto err = attempt_action(state, seed, ropts)) return DigestMismatch{0, "seed", "accepted", *err};
    history.push_back(HistoryEntry{0, state.revision(), seed, true, std::nullopt});
  }
  auto first = render(state, ropts);
  if (!first) return DigestMismatch{0, "render", "renderable seed", first.error().message};
  RasterImage current = std::move(first.value().image);
  std::optional<CritiqueReport> last_critique;
  std::optional<ActionResult> last_result;
  DiffCritic diff_critic(config.diff);

  int expected_index = 1;
  for (const auto& s : t.steps) {
    const int k = s.index;
    if (k != expected_index) return DigestMismatch{k, "index", std::to_string(expected_index), std::to_string(k)};
    ++expected_index;

    Context ctx = build_context(t.header.instruction, t.header.reference, history, current, last_critique, last_result);
    RenderedPrompt prompt = render_prompt(ctx);
    if (prompt.digest != s.context_digest) return DigestMismatch{k, "context", s.context_digest, prompt.digest};
    if (count_tokens(prompt.text, s.tokens_in.method) != s.tokens_in) {
      return DigestMismatch{k, "tokensIn", std::to_string(s.tokens_in.count),
                            std::to_string(count_tokens(prompt.text, s.tokens_in.method).count)};
    }
    if (count_tokens(s.raw_output, s.tokens_out.method) != s.tokens_out) {
      return DigestMismatch{k, "tokensOut", std::to_string(s.tokens_out.count),
                            std::to_string(count_tokens(s.raw_output, s.tokens_out.method).count)};
    }
    auto parsed = parse_turn(s.raw_output);
    if (parsed ? (parsed.value() != s.turn || s.protocol_error.has_value()) : !s.protocol_error.has_value()) {
      return DigestMismatch{k, "turn", short_digest(codec::dump(codec::to_json(s.turn))),
                            parsed ? short_digest(codec::dump(codec::to_json(parsed.value()))) : "protocol error"};
    }

    for (std::size_t i = 0; i < s.actions.size(); ++i) {
      const ActionRecord& rec = s.actions[i];
      auto err = attempt_action(state, rec.action, ropts);
      std::string what = "action " + std::to_string(i + 1);
      if (err.has_value() == rec.accepted) {
        return DigestMismatch{k, what, rec.accepted ? "accepted" : "rejected", err ? "rejected: " + *err : "accepted"};
      }
      if (err != rec.diagnostic) return DigestMismatch{k, what, rec.diagnostic.value_or(""), err.value_or("")};
      if (state.revision() != rec.revision) {
        return DigestMismatch{k, what + " revision", std::to_string(rec.revision), std::to_string(state.revision())};
      }
      history.push_back(HistoryEntry{k, rec.revision, rec.action, rec.accepted, rec.diagnostic});
    }

    std::string snapshot = serialize(state);
    if (snapshot != s.state_snapshot) {
      return DigestMismatch{k, "snapshot", sha256_hex(s.state_snapshot), sha256_hex(snapshot)};
    }
    auto rendered = render(state, ropts);
    if (!rendered) return DigestMismatch{k, "render", s.render_digest, rendered.error().message};
    current = rendered.value().image;
    std::string digest = image_digest(current);
    if (digest != s.render_digest) return DigestMismatch{k, "render", s.render_digest, digest};

    // Answering and malformed steps skip the critic; every other one has a diff critique.
    if (config.critic == CriticKind::Diff && !s.turn.answer && !s.protocol_error) {
      CritiqueInput input{t.header.instruction, t.header.reference ? &*t.header.reference : nullptr, rendered.value()};
      auto again = diff_critic.critique(input);
      std::string want = s.critique ? critique_to_json(*s.critique) : "(none)";
      std::string got = again ? critique_to_json(again.value()) : again.error().message;
      if (want != got) return DigestMismatch{k, "critique", short_digest(want), short_digest(got)};
    }
    last_critique = s.critique;
    last_result = action_result_of(s);
  }

  std::string final_snapshot = serialize(state);
  if (t.end) {
    if (t.end->steps != static_cast<int>(t.steps.size())) {
      return DigestMismatch{expected_index - 1, "end", std::to_string(t.end->steps), std::to_string(t.steps.size())};
    }
    std::optional<std::string> answer = t.steps.empty() ? std::nullopt : t.steps.back().turn.answer;
    if (answer != t.end->answer) {
      return DigestMismatch{expected_index - 1, "answer", short_digest(t.end->answer.value_or("")),
                            short_digest(answer.value_or(""))};
    }
  }
  return ReplaySummary{static_cast<int>(t.steps.size()), std::move(final_snapshot)};
}

}  // namespace canvascot
