#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>

#include "canvascot/render.hpp"

namespace canvascot {

RasterImage::RasterImage(int w, int h, Rgba fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 4);
  for (std::size_t i = 0; i < pixels.size(); i += 4) {
    pixels[i] = fill.r, pixels[i + 1] = fill.g, pixels[i + 2] = fill.b, pixels[i + 3] = fill.a;
  }
}

Rgba RasterImage::at(int x, int y) const {
  const std::uint8_t* p = &pixels[(static_cast<std::size_t>(y) * width + x) * 4];
  return {p[0], p[1], p[2], p[3]};
}

void RasterImage::set(int x, int y, Rgba c) {
  std::uint8_t* p = &pixels[(static_cast<std::size_t>(y) * width + x) * 4];
  p[0] = c.r, p[1] = c.g, p[2] = c.b, p[3] = c.a;
}

Box Box::united(const Box& o) const {
  if (empty()) return o;
  if (o.empty()) return *this;
  return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
}

Box Box::intersected(const Box& o) const {
  return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
}

std::optional<Rgba> parse_color(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (!text.empty() && text[0] == '#') {
    std::string_view h = text.substr(1);
    if (h.size() != 3 && h.size() != 6) return std::nullopt;
    std::array<int, 6> d{};
    for (std::size_t i = 0; i < h.size(); ++i) {
      d[i] = hex(h[i]);
      if (d[i] < 0) return std::nullopt;
    }
    if (h.size() == 3) {
      return Rgba{static_cast<std::uint8_t>(d[0] * 17), static_cast<std::uint8_t>(d[1] * 17),
                  static_cast<std::uint8_t>(d[2] * 17), 255};
    }
    return Rgba{static_cast<std::uint8_t>(d[0] * 16 + d[1]), static_cast<std::uint8_t>(d[2] * 16 + d[3]),
                static_cast<std::uint8_t>(d[4] * 16 + d[5]), 255};
  }
  std::string name(text);
  for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  struct Named {
    std::string_view name;
    Rgba color;
  };
  static constexpr Named kNamed[] = {
#include "named_colors.inc"
  };
  if (name == "none" || name == "transparent") return Rgba{0, 0, 0, 0};
  auto it = std::lower_bound(std::begin(kNamed), std::end(kNamed), name,
                             [](const Named& n, const std::string& key) { return n.name < key; });
  if (it != std::end(kNamed) && it->name == name) return it->color;
  return std::nullopt;
}

RasterImage downsample(const RasterImage& image, int target_width, int target_height) {
  const int w = image.width, h = image.height;
  RasterImage out(target_width, target_height);
  out.dpi_scale = image.dpi_scale;
  if (w == 0 || h == 0 || target_width == 0 || target_height == 0) return out;
  // Target pixel X covers source span [X*w, (X+1)*w) in units of 1/tw
  // source pixels; source pixel i covers [i*tw, (i+1)*tw).
  struct Tap {
    int index;
    std::uint64_t weight;
  };
  auto taps = [](int src, int dst) {
    std::vector<std::vector<Tap>> all(static_cast<std::size_t>(dst));
    for (int X = 0; X < dst; ++X) {
      std::int64_t lo = static_cast<std::int64_t>(X) * src, hi = lo + src;
      for (std::int64_t i = lo / dst; i < src && i * dst < hi; ++i) {
        std::int64_t a = std::max(lo, i * dst), b = std::min(hi, (i + 1) * dst);
        if (b > a) all[static_cast<std::size_t>(X)].push_back({static_cast<int>(i), static_cast<std::uint64_t>(b - a)});
      }
    }
    return all;
  };
  auto xs = taps(w, target_width);
  auto ys = taps(h, target_height);
  const std::uint64_t total = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
  for (int Y = 0; Y < target_height; ++Y) {
    for (int X = 0; X < target_width; ++X) {
      std::uint64_t sum[4] = {0, 0, 0, 0};
      for (const Tap& ty : ys[static_cast<std::size_t>(Y)]) {
        const std::uint8_t* row = &image.pixels[static_cast<std::size_t>(ty.index) * w * 4];
        for (const Tap& tx : xs[static_cast<std::size_t>(X)]) {
          std::uint64_t wt = ty.weight * tx.weight;
          const std::uint8_t* p = row + static_cast<std::size_t>(tx.index) * 4;
          for (int c = 0; c < 4; ++c) sum[c] += p[c] * wt;
        }
      }
      std::uint8_t* d = &out.pixels[(static_cast<std::size_t>(Y) * target_width + X) * 4];
      for (int c = 0; c < 4; ++c) d[c] = static_cast<std::uint8_t>((sum[c] + total / 2) / total);
    }
  }
  return out;
}

Result<DiffReport, DimensionMismatch> diff_images(const RasterImage& a, const RasterImage& b, int tolerance,
                                                  int grid) {
  if (a.width != b.width || a.height != b.height) {
    return DimensionMismatch{"image sizes differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                             " vs " + std::to_string(b.width) + "x" + std::to_string(b.height)};
  }
  const int w = a.width, h = a.height;
  DiffReport report;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
  std::size_t mismatched = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    for (int c = 0; c < 4; ++c) {
      int d = static_cast<int>(a.pixels[i * 4 + c]) - static_cast<int>(b.pixels[i * 4 + c]);
      if (std::abs(d) > tolerance) {
        mask[i] = 1;
        break;
      }
    }
    mismatched += mask[i];
  }
  report.mismatched_fraction = mask.empty() ? 0 : static_cast<double>(mismatched) / static_cast<double>(mask.size());

  grid = std::max(1, grid);
  report.grid_columns = std::max(1, std::min(grid, w));
  report.grid_rows = std::max(1, std::min(grid, h));
  for (int r = 0; r < report.grid_rows; ++r) {
    int y0 = r * h / report.grid_rows, y1 = (r + 1) * h / report.grid_rows;
    for (int c = 0; c < report.grid_columns; ++c) {
      int x0 = c * w / report.grid_columns, x1 = (c + 1) * w / report.grid_columns;
      std::size_t count = 0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) count += mask[static_cast<std::size_t>(y) * w + x];
      }
      std::size_t area = static_cast<std::size_t>(x1 - x0) * static_cast<std::size_t>(y1 - y0);
      report.cells.push_back({x0, y0, x1 - x0, y1 - y0});
      report.cell_scores.push_back(area == 0 ? 0 : static_cast<double>(count) / static_cast<double>(area));
    }
  }

  // Largest 4-connected mismatched component; first in row-major order on ties.
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<std::size_t> stack;
  std::size_t best = 0;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || seen[start]) continue;
    std::size_t size = 0;
    int bx0 = w, by0 = h, bx1 = -1, by1 = -1;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      std::size_t p = stack.back();
      stack.pop_back();
      ++size;
      int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
      bx0 = std::min(bx0, x), by0 = std::min(by0, y), bx1 = std::max(bx1, x), by1 = std::max(by1, y);
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
        std::size_t q = static_cast<std::size_t>(ny) * w + nx;
        if (mask[q] && !seen[q]) seen[q] = 1, stack.push_back(q);
      };
      visit(x - 1, y), visit(x + 1, y), visit(x, y - 1), visit(x, y + 1);
    }
    if (size > best) {
      best = size;
      report.bbox = PixelBox{bx0, by0, bx1 - bx0 + 1, by1 - by0 + 1};
    }
  }
  return report;
}

}  // namespace canvascot
