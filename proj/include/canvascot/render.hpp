#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canvascot/dom.hpp"
#include "canvascot/result.hpp"

namespace canvascot {

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;
  bool operator==(const Rgba&) const = default;
};

/// `#rrggbb`, `#rgb`, the CSS named colors (case-insensitive),
/// and `none`/`transparent` (alpha 0).
std::optional<Rgba> parse_color(std::string_view text);

/// Row-major RGBA8 raster.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  ///< width * height * 4
  int dpi_scale = 1;                 ///< supersampling factor used to produce it

  RasterImage() = default;
  RasterImage(int w, int h, Rgba fill = {255, 255, 255, 255});

  Rgba at(int x, int y) const;
  void set(int x, int y, Rgba c);
  bool operator==(const RasterImage& o) const {
    return width == o.width && height == o.height && pixels == o.pixels;
  }
};

struct RenderOptions {
  double canvas_width = kDefaultCanvasWidth;
  Rgba background{255, 255, 255, 255};
  int supersample = 4;
  int min_height = 100;
  int max_height = 16384;
};

/// Axis-aligned box in canvas pixels, half-open on the far edges.
struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const { return !(x1 > x0 && y1 > y0); }
  bool intersects(const Box& o) const { return !empty() && !o.empty() && x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1; }
  Box united(const Box& o) const;
  Box intersected(const Box& o) const;
};

/// Layout box of an element that carries an id. Boxes are in document
/// order; the boxes of an element's descendants occupy [index+1, subtree_end).
struct ElementBox {
  std::string id;
  std::string tag;
  Box box;
  std::size_t subtree_end = 0;
};

struct RenderResult {
  RasterImage image;
  std::vector<ElementBox> boxes;
};

enum class RenderErrorKind { CanvasOverflow };

struct RenderError {
  RenderErrorKind kind = RenderErrorKind::CanvasOverflow;
  std::string message;
};

/// Deterministic layout + rasterization of the supported subset. HTML blocks
/// stack vertically inside the canvas width; SVG content is drawn with its
/// declared geometry. Anti-aliasing is supersample-then-box-filter.
Result<RenderResult, RenderError> render(const DomState& state, const RenderOptions& options = {});

/// Layout-only pass: the canvas height `render` would produce, without
/// rasterizing. Fails the same way `render` does.
Result<int, RenderError> measure_height(const DomState& state, const RenderOptions& options = {});

/// True for every tag the renderer knows how to place or draw.
bool renderer_supports(std::string_view tag);

/// Area-weighted box filter to an arbitrary size. Same size is the identity.
RasterImage downsample(const RasterImage& image, int target_width, int target_height);

struct PixelBox {
  int x = 0, y = 0, width = 0, height = 0;
  bool operator==(const PixelBox&) const = default;
};

struct DiffReport {
  double mismatched_fraction = 0;
  int grid_columns = 0;
  int grid_rows = 0;
  std::vector<PixelBox> cells;      ///< row-major, tiles the image exactly
  std::vector<double> cell_scores;  ///< mismatch fraction per cell
  std::optional<PixelBox> bbox;     ///< largest 4-connected mismatched region
};

struct DimensionMismatch {
  std::string message;
};

/// Pixelwise comparison. A pixel mismatches when any channel differs by
/// more than `tolerance`.
Result<DiffReport, DimensionMismatch> diff_images(const RasterImage& a, const RasterImage& b, int tolerance = 0,
                                                  int grid = 4);

}  // namespace canvascot
