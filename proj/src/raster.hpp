#pragma once

// Internal drawing layer: device-space paths, stroking, and the
// strip-based supersampling rasterizer behind render().

#include <string>
#include <variant>
#include <vector>

#include "canvascot/geometry.hpp"
#include "canvascot/render.hpp"

namespace canvascot::raster {

using Contour = std::vector<Point>;

struct Subpath {
  Contour points;
  bool closed = false;
};

/// Builds device-space subpaths from user-space commands. Curves are
/// flattened after transformation.
class PathBuilder {
 public:
  explicit PathBuilder(const Affine& transform) : m_(transform) {}

  void move_to(Point p);
  void line_to(Point p);
  void cubic_to(Point c1, Point c2, Point p);
  void quad_to(Point c, Point p);
  /// SVG elliptical arc from the current point.
  void arc_to(double rx, double ry, double x_rotation_deg, bool large_arc, bool sweep, Point p);
  void close();

  Point current() const { return cur_; }
  std::vector<Subpath> finish();

 private:
  void flush();

  Affine m_;
  std::vector<Subpath> done_;
  Subpath open_;
  Point cur_{};
  Point start_{};
  bool has_open_ = false;
};

enum class LineCap { Butt, Round, Square };
enum class LineJoin { Miter, Round, Bevel };

struct StrokeStyle {
  double width = 1;  ///< device pixels
  LineCap cap = LineCap::Butt;
  LineJoin join = LineJoin::Miter;
  double miter_limit = 4;
  std::vector<double> dashes;  ///< device pixels, even count, all > 0 sum
  double dash_offset = 0;
};

/// Converts subpaths into positively oriented convex pieces whose nonzero
/// union is the stroke outline.
std::vector<Contour> stroke_outline(const std::vector<Subpath>& paths, const StrokeStyle& style);

/// Closed polygon approximating a circle in device space.
Contour circle_contour(Point center, double radius);

struct FillItem {
  std::vector<Contour> contours;
  bool even_odd = false;
  Rgba color;
  Box clip;
};

struct TextItem {
  std::string text;  ///< UTF-8
  double x = 0;
  double baseline = 0;
  double size = 16;
  bool bold = false;
  Rgba color;
  Box clip;
};

using DrawItem = std::variant<FillItem, TextItem>;

/// Fixed monospace metrics shared by layout and glyph drawing.
inline constexpr double kAdvanceRatio = 0.6;
inline constexpr double kAscentRatio = 0.95;
inline constexpr double kLineHeightRatio = 1.25;

/// Number of glyph cells a UTF-8 string occupies (one per code point).
std::size_t glyph_count(std::string_view utf8);

/// Device bounds of an item (before clipping).
Box item_bounds(const DrawItem& item);

/// Rasterizes the display list onto a width x height canvas at the given
/// supersampling factor, then box-filters down.
RasterImage rasterize(const std::vector<DrawItem>& items, int width, int height, int supersample, Rgba background);

}  // namespace canvascot::raster
