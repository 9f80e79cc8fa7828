#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canvascot/node.hpp"
#include "canvascot/result.hpp"

namespace canvascot {

class DomState;

/// Default notebook width in CSS pixels.
inline constexpr double kDefaultCanvasWidth = 500.0;

enum class DiagnosticKind {
  MalformedMarkup,
  UnsupportedTag,
  MissingRequiredAttribute,
  DuplicateIdInFragment,
  OversizeDimension,
};

std::string_view to_string(DiagnosticKind kind);

struct ParseDiagnostic {
  DiagnosticKind kind = DiagnosticKind::MalformedMarkup;
  std::size_t offset = 0;  ///< byte offset into the fragment text
  std::string path;        ///< element path, e.g. "svg#sg1/rect#r1"
  std::string message;

  /// "MalformedMarkup at byte 12 (svg#sg1/rect): unterminated start tag"
  std::string describe() const;

  bool operator==(const ParseDiagnostic&) const = default;
};

/// A parsed, self-consistent subtree ready to mount.
struct Fragment {
  std::vector<DomNode> roots;
  std::vector<std::string> introduced_ids;  ///< document order
  std::string source_text;
};

/// Element names accepted by the parser. Every one is handled by the renderer.
const std::vector<std::string_view>& supported_tags();
bool is_supported_tag(std::string_view tag);

/// Attributes whose value must be a finite decimal number.
bool is_geometry_attribute(std::string_view name);

/// Valid attribute name for serialization: [A-Za-z_:][A-Za-z0-9_:.-]*
bool is_valid_attribute_name(std::string_view name);

/// Checks one attribute value against the attribute grammar (numeric
/// geometry, path data, point lists). Returns an error message on failure.
std::optional<std::string> check_attribute_value(std::string_view name, std::string_view value);

/// Parses raw HTML/SVG fragment text. Deterministic; reports the first
/// problem in document order and never returns a partial tree.
Result<Fragment, ParseDiagnostic> parse_fragment(std::string_view text);

struct ValidationOptions {
  double canvas_width = kDefaultCanvasWidth;
};

/// Checks a parsed fragment against a state: no id collisions (ids in the
/// subtree of `replace_target` are exempt) and every declared width fits
/// the canvas.
std::optional<ParseDiagnostic> validate_fragment(const Fragment& fragment, const DomState& state,
                                                 std::optional<std::string_view> replace_target = {});

/// Same checks against an explicit id set, for callers without a DomState.
std::optional<ParseDiagnostic> validate_fragment(const Fragment& fragment,
                                                 const std::vector<std::string_view>& taken_ids,
                                                 const ValidationOptions& options);

}  // namespace canvascot
