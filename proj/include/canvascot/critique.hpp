#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canvascot/result.hpp"

namespace canvascot {

enum class IssueCategory { AttributeError, FalseExistence, SpatialConflict };

std::string_view to_string(IssueCategory category);
std::optional<IssueCategory> parse_issue_category(std::string_view name);

struct CritiqueIssue {
  IssueCategory category = IssueCategory::SpatialConflict;
  std::string description;
  std::vector<std::string> target_ids;
  bool operator==(const CritiqueIssue&) const = default;
};

struct CritiqueReport {
  bool hallucination_detected = false;
  std::vector<CritiqueIssue> issues;
  /// Free-text critique when a model critic did not return the JSON shape.
  std::optional<std::string> raw_text;
  bool operator==(const CritiqueReport&) const = default;
};

/// {"hallucinationDetected": ..., "issues": [{"category", "description", "targetIds"}], "rawText"?}
std::string critique_to_json(const CritiqueReport& report);
Result<CritiqueReport, std::string> critique_from_json(std::string_view text);

}  // namespace canvascot
