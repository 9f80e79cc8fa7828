#include "canvascot/protocol.hpp"

#include <array>
#include <cctype>

#include "json.hpp"

namespace canvascot {
namespace {

using json = nlohmann::ordered_json;

struct TagKind {
  std::string_view open;
  std::string_view close;
};

constexpr std::array<TagKind, 3> kTags{{
    {"<think>", "</think>"},
    {"<tool_call>", "</tool_call>"},
    {"<answer>", "</answer>"},
}};

// Earliest opening tag at or after `from`; returns tag index or -1.
int next_open(std::string_view text, std::size_t from, std::size_t limit, std::size_t& at) {
  int best = -1;
  at = std::string_view::npos;
  for (std::size_t k = 0; k < kTags.size(); ++k) {
    std::size_t p = text.find(kTags[k].open, from);
    if (p != std::string_view::npos && p < limit && p < at) at = p, best = static_cast<int>(k);
  }
  return best;
}

ProtocolError bad(ProtocolErrorKind kind, std::string message) { return ProtocolError{kind, std::move(message), 0}; }

Result<std::string, ProtocolError> required_string(const json& args, const char* key) {
  auto it = args.find(key);
  if (it == args.end()) return bad(ProtocolErrorKind::BadArguments, std::string("missing argument \"") + key + "\"");
  if (!it->is_string()) return bad(ProtocolErrorKind::BadArguments, std::string("argument \"") + key + "\" must be a string");
  return it->get<std::string>();
}

Result<std::optional<std::string>, ProtocolError> optional_string(const json& args, const char* key) {
  auto it = args.find(key);
  if (it == args.end() || it->is_null()) return std::optional<std::string>{};
  if (!it->is_string()) {
    return bad(ProtocolErrorKind::BadArguments, std::string("argument \"") + key + "\" must be a string or null");
  }
  return std::optional<std::string>{it->get<std::string>()};
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }
bool is_space_byte(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::string_view to_string(ProtocolErrorKind kind) {
  switch (kind) {
    case ProtocolErrorKind::UnclosedTag: return "UnclosedTag";
    case ProtocolErrorKind::NestedTag: return "NestedTag";
    case ProtocolErrorKind::EmptyTurn: return "EmptyTurn";
    case ProtocolErrorKind::UnknownTool: return "UnknownTool";
    case ProtocolErrorKind::BadArguments: return "BadArguments";
    case ProtocolErrorKind::MalformedPayload: return "MalformedPayload";
  }
  return "ProtocolError";
}

std::string ProtocolError::describe() const { return std::string(to_string(kind)) + ": " + message; }

Result<Turn, ProtocolError> parse_turn(std::string_view text) {
  Turn turn;
  std::size_t pos = 0;
  while (true) {
    std::size_t at = 0;
    int k = next_open(text, pos, text.size(), at);
    if (k < 0) break;
    const TagKind& tag = kTags[static_cast<std::size_t>(k)];
    std::size_t body = at + tag.open.size();
    std::size_t close = text.find(tag.close, body);
    if (close == std::string_view::npos) {
      return ProtocolError{ProtocolErrorKind::UnclosedTag,
                           std::string(tag.open) + " at byte " + std::to_string(at) + " is never closed", at};
    }
    std::size_t inner_at = 0;
    if (next_open(text, body, close, inner_at) >= 0) {
      return ProtocolError{ProtocolErrorKind::NestedTag,
                           "tag opened at byte " + std::to_string(inner_at) + " inside " + std::string(tag.open) +
                               " at byte " + std::to_string(at),
                           inner_at};
    }
    std::string inner(text.substr(body, close - body));
    if (k == 0) {
      turn.thoughts.push_back(std::move(inner));
    } else if (k == 1) {
      turn.tool_calls.push_back(std::move(inner));
    } else {
      if (!turn.answer) turn.answer = std::move(inner);
      ++turn.answer_regions;
    }
    pos = close + tag.close.size();
  }
  if (turn.tool_calls.empty() && !turn.answer) {
    return ProtocolError{ProtocolErrorKind::EmptyTurn, "turn has neither a tool call nor an answer", 0};
  }
  return turn;
}

std::optional<std::string> extract_answer(const Turn& turn) { return turn.answer; }

Result<Action, ProtocolError> decode_tool_call(std::string_view payload) {
  json doc = json::parse(payload.begin(), payload.end(), nullptr, false);
  if (doc.is_discarded()) return bad(ProtocolErrorKind::MalformedPayload, "tool call is not valid JSON");
  if (!doc.is_object()) return bad(ProtocolErrorKind::MalformedPayload, "tool call must be a JSON object");
  auto name_it = doc.find("name");
  if (name_it == doc.end() || !name_it->is_string()) {
    return bad(ProtocolErrorKind::MalformedPayload, "tool call has no string \"name\"");
  }
  std::string name = name_it->get<std::string>();
  json args = json::object();
  if (auto it = doc.find("arguments"); it != doc.end() && !it->is_null()) {
    args = *it;
    if (args.is_string()) {
      std::string inner = args.get<std::string>();
      args = json::parse(inner, nullptr, false);
      if (args.is_discarded()) return bad(ProtocolErrorKind::MalformedPayload, "\"arguments\" string is not valid JSON");
    }
    if (!args.is_object()) return bad(ProtocolErrorKind::BadArguments, "\"arguments\" must be an object");
  }

  if (name == "insert_element") {
    auto fragment = required_string(args, "fragment");
    if (!fragment) return fragment.error();
    auto root = optional_string(args, "rootId");
    if (!root) return root.error();
    auto before = optional_string(args, "beforeId");
    if (!before) return before.error();
    return Action{InsertAction{fragment.value(), root.value(), before.value()}};
  }
  if (name == "modify_element") {
    auto target = required_string(args, "targetId");
    if (!target) return target.error();
    auto it = args.find("attrs");
    if (it == args.end()) return bad(ProtocolErrorKind::BadArguments, "missing argument \"attrs\"");
    if (!it->is_object()) return bad(ProtocolErrorKind::BadArguments, "argument \"attrs\" must be an object");
    ModifyAction m{target.value(), {}};
    for (const auto& [key, value] : it->items()) {
      if (value.is_null()) {
        m.attrs.emplace_back(key, std::nullopt);
      } else if (value.is_string()) {
        m.attrs.emplace_back(key, value.get<std::string>());
      } else if (value.is_number() || value.is_boolean()) {
        m.attrs.emplace_back(key, value.dump());
      } else {
        return bad(ProtocolErrorKind::BadArguments, "attribute \"" + key + "\" must be a string, number or null");
      }
    }
    return Action{std::move(m)};
  }
  if (name == "replace_element") {
    auto target = required_string(args, "targetId");
    if (!target) return target.error();
    auto fragment = required_string(args, "fragment");
    if (!fragment) return fragment.error();
    return Action{ReplaceAction{target.value(), fragment.value()}};
  }
  if (name == "remove_element") {
    auto target = required_string(args, "targetId");
    if (!target) return target.error();
    return Action{DeleteAction{target.value()}};
  }
  if (name == "clear") return Action{ClearAction{}};
  return bad(ProtocolErrorKind::UnknownTool, "unknown tool \"" + name + "\"");
}

std::string encode_tool_call(const Action& action) {
  json out;
  out["name"] = std::string(tool_name(action));
  json args = json::object();
  auto opt = [](const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); };
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, InsertAction>) {
          args["rootId"] = opt(a.root_id);
          args["beforeId"] = opt(a.before_id);
          args["fragment"] = a.fragment;
        } else if constexpr (std::is_same_v<T, ModifyAction>) {
          args["targetId"] = a.target_id;
          json attrs = json::object();
          for (const auto& [k, v] : a.attrs) attrs[k] = opt(v);
          args["attrs"] = std::move(attrs);
        } else if constexpr (std::is_same_v<T, ReplaceAction>) {
          args["targetId"] = a.target_id;
          args["fragment"] = a.fragment;
        } else if constexpr (std::is_same_v<T, DeleteAction>) {
          args["targetId"] = a.target_id;
        }
      },
      action);
  out["arguments"] = std::move(args);
  return out.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string_view to_string(TokenMethod method) {
  switch (method) {
    case TokenMethod::WordPunct: return "word-punct";
    case TokenMethod::CodePoints: return "code-points";
  }
  return "word-punct";
}

std::optional<TokenMethod> parse_token_method(std::string_view name) {
  if (name == "word-punct") return TokenMethod::WordPunct;
  if (name == "code-points") return TokenMethod::CodePoints;
  return std::nullopt;
}

TokenCount count_tokens(std::string_view text, TokenMethod method) {
  TokenCount tc{0, method};
  if (method == TokenMethod::CodePoints) {
    for (char ch : text) {
      auto c = static_cast<unsigned char>(ch);
      if ((c & 0xc0) != 0x80 && !is_space_byte(c)) ++tc.count;
    }
    return tc;
  }
  bool in_word = false;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      if (!in_word) ++tc.count;
      in_word = true;
      continue;
    }
    in_word = false;
    if (!is_space_byte(c)) ++tc.count;
  }
  return tc;
}

}  // namespace canvascot
