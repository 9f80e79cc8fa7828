#include "canvascot/critic.hpp"

#include <cstdio>

#include "canvascot/digest.hpp"
#include "canvascot/image_io.hpp"

namespace canvascot {
namespace {

constexpr const char* kCriticSystem =
    "You check a rendered notebook against a reference image.\n"
    "Reply with one JSON object and nothing else:\n"
    "{\"hallucinationDetected\": true|false, \"issues\": [{\"category\": "
    "\"AttributeError\"|\"FalseExistence\"|\"SpatialConflict\", \"description\": \"...\", "
    "\"targetIds\": [\"...\"]}]}\n"
    "AttributeError: an element exists but has a wrong color, size or shape.\n"
    "FalseExistence: an element is drawn that the reference does not contain, or one is missing.\n"
    "SpatialConflict: an element is in the wrong place or overlaps incorrectly.\n"
    "Set hallucinationDetected to false and issues to [] when the render matches.\n";

std::string percent(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", f * 100.0);
  return buf;
}

ChatImage attach(const RasterImage& image) {
  ChatImage out;
  out.png = encode_png(image);
  out.digest = sha256_hex(out.png);
  return out;
}

}  // namespace

Result<CritiqueReport, DimensionMismatch> deterministic_critic(const RasterImage& original, const RasterImage& render,
                                                               const DiffCriticOptions& options,
                                                               const std::vector<ElementBox>& boxes) {
  auto diff = diff_images(original, render, options.tolerance, options.grid);
  if (!diff) return diff.error();
  const DiffReport& d = diff.value();
  CritiqueReport report;
  if (d.mismatched_fraction <= options.threshold) return report;

  for (std::size_t c = 0; c < d.cells.size(); ++c) {
    if (d.cell_scores[c] <= options.threshold) continue;
    const PixelBox& cell = d.cells[c];
    Box cb{double(cell.x), double(cell.y), double(cell.x + cell.width), double(cell.y + cell.height)};
    CritiqueIssue issue;
    issue.category = IssueCategory::SpatialConflict;
    issue.description = "region row " + std::to_string(c / d.grid_columns) + " col " +
                        std::to_string(c % d.grid_columns) + " [x=" + std::to_string(cell.x) +
                        " y=" + std::to_string(cell.y) + " w=" + std::to_string(cell.width) +
                        " h=" + std::to_string(cell.height) + "] differs on " + percent(d.cell_scores[c]) +
                        " of pixels";
    // Leaf-most boxes: skip an element when one of its descendants also
    // overlaps the cell.
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (!boxes[i].box.intersects(cb)) continue;
      bool deeper = false;
      for (std::size_t j = i + 1; j < boxes[i].subtree_end && !deeper; ++j) deeper = boxes[j].box.intersects(cb);
      if (!deeper) issue.target_ids.push_back(boxes[i].id);
    }
    report.issues.push_back(std::move(issue));
  }
  report.hallucination_detected = !report.issues.empty();
  return report;
}

Result<CritiqueReport, CriticError> DiffCritic::critique(const CritiqueInput& input) {
  if (!input.reference) return CritiqueReport{};
  const RasterImage& ref = *input.reference;
  const RasterImage& img = input.render.image;
  double sx = double(ref.width) / img.width, sy = double(ref.height) / img.height;
  std::vector<ElementBox> boxes = input.render.boxes;
  for (auto& b : boxes) b.box = Box{b.box.x0 * sx, b.box.y0 * sy, b.box.x1 * sx, b.box.y1 * sy};
  RasterImage scaled = (ref.width == img.width && ref.height == img.height) ? img : downsample(img, ref.width, ref.height);
  auto r = deterministic_critic(ref, scaled, options_, boxes);
  if (!r) return CriticError{r.error().message};
  return r.value();
}

std::vector<ChatMessage> LlmCritic::messages(const CritiqueInput& input) {
  std::vector<ChatMessage> out;
  out.push_back({"system", kCriticSystem, {}});
  ChatMessage user{"user", "Task: " + input.instruction + "\n", {}};
  if (input.reference) {
    user.text += "The first image is the reference. The second image is the current render.\n";
    user.images.push_back(attach(*input.reference));
  } else {
    user.text += "There is no reference image. Judge the render against the task text.\n";
  }
  std::string ids;
  for (const auto& b : input.render.boxes) ids += (ids.empty() ? "" : ", ") + b.id;
  user.text += "Element ids on the notebook: " + (ids.empty() ? std::string("(none)") : ids) + "\n";
  user.images.push_back(attach(input.render.image));
  out.push_back(std::move(user));
  return out;
}

CritiqueReport LlmCritic::parse_reply(const std::string& text) {
  auto open = text.find('{');
  auto close = text.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    auto parsed = critique_from_json(std::string_view(text).substr(open, close - open + 1));
    if (parsed) return parsed.value();
  }
  CritiqueReport r;
  r.raw_text = text;
  return r;
}

Result<CritiqueReport, CriticError> LlmCritic::critique(const CritiqueInput& input) {
  auto reply = backend_.complete(messages(input));
  if (!reply) return CriticError{reply.error().message};
  return parse_reply(reply.value());
}

}  // namespace canvascot
