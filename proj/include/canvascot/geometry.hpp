#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace canvascot {

/// Strict finite decimal: [+-]? (digits [. digits?] | . digits) ([eE] [+-]? digits)?
/// Surrounding ASCII whitespace is allowed.
std::optional<double> parse_decimal(std::string_view text);

struct Point {
  double x = 0;
  double y = 0;
  bool operator==(const Point&) const = default;
};

/// One absolute-or-relative SVG path command with its numeric arguments.
struct PathCommand {
  char op = 'M';  ///< one of MmLlHhVvCcSsQqTtAaZz
  std::vector<double> args;
};

/// Parses SVG path data. Implicit repeated commands are expanded, so each
/// PathCommand carries exactly one argument group. Must start with M or m.
std::optional<std::vector<PathCommand>> parse_path_data(std::string_view text);

/// Parses a points list ("x1,y1 x2,y2 ..."). Requires an even, nonzero count.
std::optional<std::vector<Point>> parse_point_list(std::string_view text);

/// Parses a whitespace/comma separated list of numbers (viewBox, dasharray).
std::optional<std::vector<double>> parse_number_list(std::string_view text);

/// 2D affine transform [a c e; b d f].
struct Affine {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  Point apply(Point p) const { return {a * p.x + c * p.y + e, b * p.x + d * p.y + f}; }
  /// this * other (other applied first).
  Affine then_after(const Affine& other) const;
  double scale_factor() const;
  static Affine translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
  static Affine scale(double sx, double sy) { return {sx, 0, 0, sy, 0, 0}; }
};

/// Parses an SVG transform list (matrix, translate, scale, rotate, skewX,
/// skewY). Returns nullopt on malformed input.
std::optional<Affine> parse_transform(std::string_view text);

}  // namespace canvascot
