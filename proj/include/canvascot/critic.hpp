#pragma once

#include <optional>
#include <string>
#include <vector>

#include "canvascot/chat.hpp"
#include "canvascot/critique.hpp"
#include "canvascot/render.hpp"
#include "canvascot/result.hpp"

namespace canvascot {

struct CriticError {
  std::string message;
};

/// What a critic sees after a solver turn.
struct CritiqueInput {
  const std::string& instruction;
  const RasterImage* reference;  ///< may be null for pure generation tasks
  const RenderResult& render;    ///< post-action render with element boxes
};

class Critic {
 public:
  virtual ~Critic() = default;
  virtual Result<CritiqueReport, CriticError> critique(const CritiqueInput& input) = 0;
};

struct DiffCriticOptions {
  double threshold = 0.01;  ///< mismatch fraction at or below this is a match
  int tolerance = 16;       ///< per-channel delta still counted as equal
  int grid = 4;             ///< cells per axis
};

/// Pixel-diff critique of two same-size images. One SpatialConflict per grid
/// cell scoring above the threshold; ids come from `boxes` (same coordinate
/// space as the images) that overlap the cell.
Result<CritiqueReport, DimensionMismatch> deterministic_critic(const RasterImage& original, const RasterImage& render,
                                                               const DiffCriticOptions& options,
                                                               const std::vector<ElementBox>& boxes = {});

/// Downsamples the render to the reference size, then diffs. With no
/// reference there is nothing to compare and the report is empty.
class DiffCritic : public Critic {
 public:
  explicit DiffCritic(DiffCriticOptions options = {}) : options_(options) {}
  Result<CritiqueReport, CriticError> critique(const CritiqueInput& input) override;

 private:
  DiffCriticOptions options_;
};

/// Asks a chat backend for the JSON report. A reply that is not the JSON
/// shape is kept as raw text with no hallucination flag.
class LlmCritic : public Critic {
 public:
  explicit LlmCritic(ChatBackend& backend) : backend_(backend) {}
  Result<CritiqueReport, CriticError> critique(const CritiqueInput& input) override;

  /// Message list sent for `input` (exposed for tests).
  static std::vector<ChatMessage> messages(const CritiqueInput& input);
  static CritiqueReport parse_reply(const std::string& text);

 private:
  ChatBackend& backend_;
};

}  // namespace canvascot
