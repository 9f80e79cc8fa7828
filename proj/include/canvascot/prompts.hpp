#pragma once

#include <string>
#include <string_view>

namespace canvascot::prompts {

/// Solver system prompt. Contains the `{provided_tools}` placeholder.
std::string_view system_template();

/// Per-turn tool response. Contains `{}` where the tool name goes.
std::string_view critique_template();

/// First user message. Contains `{current_svg_code}`.
std::string_view user_template();

/// Function schemas for the five notebook tools.
std::string_view tools_json();

/// Replaces the first occurrence of `placeholder` in `text`.
std::string fill(std::string_view text, std::string_view placeholder, std::string_view value);

}  // namespace canvascot::prompts
