#include "canvascot/context.hpp"

#include "canvascot/digest.hpp"
#include "canvascot/image_io.hpp"
#include "canvascot/prompts.hpp"
#include "canvascot/protocol.hpp"

namespace canvascot {
namespace {

ChatImage attach(const RasterImage& image) {
  ChatImage out;
  out.png = encode_png(image);
  out.digest = sha256_hex(out.png);
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

namespace prompts {

std::string fill(std::string_view text, std::string_view placeholder, std::string_view value) {
  std::string out(text);
  if (auto p = out.find(placeholder); p != std::string::npos) out.replace(p, placeholder.size(), value);
  return out;
}

}  // namespace prompts

Context build_context(std::string instruction, std::optional<RasterImage> original_image,
                      std::vector<HistoryEntry> action_history, RasterImage state_image,
                      std::optional<CritiqueReport> critique, std::optional<ActionResult> last_result) {
  return Context{std::move(instruction), std::move(original_image), std::move(action_history), std::move(state_image),
                 std::move(critique), std::move(last_result)};
}

std::string format_action_history(const std::vector<HistoryEntry>& history) {
  std::string out = "[Action History]\n";
  if (history.empty()) return out + "(none)\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& e = history[i];
    out += std::to_string(i + 1) + ". turn " + std::to_string(e.turn) + ", revision " + std::to_string(e.revision) +
           (e.accepted ? ", accepted: " : ", rejected: ") + encode_tool_call(e.action);
    if (e.diagnostic) out += "\n   " + *e.diagnostic;
    out += '\n';
  }
  return out;
}

std::string format_tool_response(const ActionResult& result, const std::optional<CritiqueReport>& critique) {
  std::string tools = result.tools.empty() ? "none" : join(result.tools, ", ");
  std::string text = prompts::fill(prompts::critique_template(), "{}", tools);

  std::string extra;
  for (const auto& r : result.rejections) extra += "[Rejected] " + r + "\n";
  for (const auto& n : result.notices) extra += "[Protocol Error] " + n + "\n";
  if (!extra.empty()) {
    // Right after the action result line.
    auto line_end = text.find('\n', text.find("[Action Result]"));
    text.insert(line_end + 1, extra);
  }
  if (critique) {
    auto close = text.rfind("</tool_response>");
    text.insert(close, "[Critique Report]\n" + critique_to_json(*critique) + "\n\n");
  }
  return text;
}

RenderedPrompt render_prompt(const Context& c) {
  RenderedPrompt out;
  out.messages.push_back({"system", prompts::fill(prompts::system_template(), "{provided_tools}", prompts::tools_json()), {}});

  ChatMessage user{"user", c.instruction, {}};
  if (c.original_image) user.images.push_back(attach(*c.original_image));
  if (!c.last_result) user.images.push_back(attach(c.state_image));
  out.messages.push_back(std::move(user));

  if (!c.action_history.empty()) out.messages.push_back({"user", format_action_history(c.action_history), {}});

  if (c.last_result) {
    ChatMessage tool{"tool", format_tool_response(*c.last_result, c.critique), {}};
    if (c.original_image) tool.images.push_back(attach(*c.original_image));
    tool.images.push_back(attach(c.state_image));
    out.messages.push_back(std::move(tool));
  }

  for (const auto& m : out.messages) {
    out.text += "<|" + m.role + "|>\n" + m.text;
    if (!m.text.empty() && m.text.back() != '\n') out.text += '\n';
    for (const auto& img : m.images) out.text += "[image sha256:" + img.digest + "]\n";
  }
  out.digest = sha256_hex(out.text);
  return out;
}

}  // namespace canvascot
