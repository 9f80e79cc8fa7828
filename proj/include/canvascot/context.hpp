#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "canvascot/critique.hpp"
#include "canvascot/dom.hpp"
#include "canvascot/render.hpp"

namespace canvascot {

/// One attempted action. Turn 0 holds the task's initial content.
struct HistoryEntry {
  int turn = 0;
  std::uint64_t revision = 0;  ///< state revision after the attempt
  Action action;
  bool accepted = true;
  std::optional<std::string> diagnostic;
};

/// What the previous solver turn did, minus its reasoning.
struct ActionResult {
  std::vector<std::string> tools;       ///< tool names in call order
  std::vector<std::string> rejections;  ///< "<tool> <target>: <diagnostic>"
  std::vector<std::string> notices;     ///< protocol and decode errors
};

struct Context {
  std::string instruction;
  std::optional<RasterImage> original_image;
  std::vector<HistoryEntry> action_history;
  RasterImage state_image;
  std::optional<CritiqueReport> critique;
  std::optional<ActionResult> last_result;  ///< absent before the first turn
};

/// Takes no Turn, so prior thoughts cannot reach the next prompt.
Context build_context(std::string instruction, std::optional<RasterImage> original_image,
                      std::vector<HistoryEntry> action_history, RasterImage state_image,
                      std::optional<CritiqueReport> critique, std::optional<ActionResult> last_result);

struct ChatImage {
  std::string png;
  std::string digest;  ///< sha256 of png
};

struct ChatMessage {
  std::string role;  ///< system | user | tool
  std::string text;
  std::vector<ChatImage> images;
};

struct RenderedPrompt {
  std::vector<ChatMessage> messages;
  std::string text;    ///< flat form: message texts plus image digest markers
  std::string digest;  ///< sha256 of text
};

RenderedPrompt render_prompt(const Context& context);

/// `<tool_response>` envelope for the previous turn.
std::string format_tool_response(const ActionResult& result, const std::optional<CritiqueReport>& critique);

/// "[Action History]" listing.
std::string format_action_history(const std::vector<HistoryEntry>& history);

}  // namespace canvascot
