#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canvascot/dom.hpp"
#include "canvascot/result.hpp"

namespace canvascot {

/// One solver output split into its tagged regions.
struct Turn {
  std::vector<std::string> thoughts;
  std::vector<std::string> tool_calls;  ///< raw payload text
  std::optional<std::string> answer;    ///< first answer region
  std::size_t answer_regions = 0;

  bool operator==(const Turn&) const = default;
};

enum class ProtocolErrorKind {
  UnclosedTag,
  NestedTag,
  EmptyTurn,
  UnknownTool,
  BadArguments,
  MalformedPayload,
};

std::string_view to_string(ProtocolErrorKind kind);

struct ProtocolError {
  ProtocolErrorKind kind;
  std::string message;
  std::size_t offset = 0;  ///< byte offset in the raw text, when meaningful

  std::string describe() const;
};

/// Extracts think/tool_call/answer regions in document order. Text outside
/// tags and stray closing tags are ignored.
Result<Turn, ProtocolError> parse_turn(std::string_view text);

/// Inner text of the first answer region, verbatim.
std::optional<std::string> extract_answer(const Turn& turn);

/// {"name": ..., "arguments": {...}} -> Action. `arguments` may also be a
/// JSON-encoded string. Numeric and boolean modify values become strings.
Result<Action, ProtocolError> decode_tool_call(std::string_view payload);

/// Compact JSON payload; decode_tool_call(encode_tool_call(a)) == a.
std::string encode_tool_call(const Action& action);

// ---------------------------------------------------------------------------
// Token accounting

enum class TokenMethod {
  WordPunct,   ///< runs of word bytes (alnum, _, non-ASCII) plus one per other visible char
  CodePoints,  ///< one per non-space code point
};

std::string_view to_string(TokenMethod method);
std::optional<TokenMethod> parse_token_method(std::string_view name);

struct TokenCount {
  std::size_t count = 0;
  TokenMethod method = TokenMethod::WordPunct;
  bool operator==(const TokenCount&) const = default;
};

TokenCount count_tokens(std::string_view text, TokenMethod method = TokenMethod::WordPunct);

}  // namespace canvascot
