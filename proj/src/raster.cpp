#include "raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace canvascot::raster {
namespace {

#include "font_data.inc"

constexpr double kPi = 3.14159265358979323846;

double dist(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }
Point lerp(Point a, Point b, double t) { return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t}; }

double signed_area(const Contour& c) {
  double a = 0;
  for (std::size_t i = 0, n = c.size(); i < n; ++i) {
    const Point& p = c[i];
    const Point& q = c[(i + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return a / 2;
}

void push_piece(std::vector<Contour>& out, Contour piece) {
  double area = signed_area(piece);
  if (std::abs(area) < 1e-9) return;
  if (area < 0) std::reverse(piece.begin(), piece.end());
  out.push_back(std::move(piece));
}

}  // namespace

// ---------------------------------------------------------------------------
// PathBuilder

void PathBuilder::flush() {
  if (has_open_ && !open_.points.empty()) done_.push_back(std::move(open_));
  open_ = Subpath{};
  has_open_ = false;
}

void PathBuilder::move_to(Point p) {
  flush();
  open_.points.push_back(m_.apply(p));
  cur_ = start_ = p;
  has_open_ = true;
}

void PathBuilder::line_to(Point p) {
  if (!has_open_) move_to(cur_);
  open_.points.push_back(m_.apply(p));
  cur_ = p;
}

void PathBuilder::cubic_to(Point c1, Point c2, Point p) {
  if (!has_open_) move_to(cur_);
  Point d0 = m_.apply(cur_), d1 = m_.apply(c1), d2 = m_.apply(c2), d3 = m_.apply(p);
  double length = dist(d0, d1) + dist(d1, d2) + dist(d2, d3);
  int n = std::clamp(static_cast<int>(std::ceil(length / 1.5)), 2, 200);
  for (int i = 1; i <= n; ++i) {
    double t = static_cast<double>(i) / n;
    double u = 1 - t;
    double b0 = u * u * u, b1 = 3 * u * u * t, b2 = 3 * u * t * t, b3 = t * t * t;
    open_.points.push_back({b0 * d0.x + b1 * d1.x + b2 * d2.x + b3 * d3.x, b0 * d0.y + b1 * d1.y + b2 * d2.y + b3 * d3.y});
  }
  cur_ = p;
}

void PathBuilder::quad_to(Point c, Point p) {
  Point c1 = lerp(cur_, c, 2.0 / 3.0);
  Point c2 = lerp(p, c, 2.0 / 3.0);
  cubic_to(c1, c2, p);
}

void PathBuilder::arc_to(double rx, double ry, double x_rotation_deg, bool large_arc, bool sweep, Point p) {
  Point p0 = cur_;
  if (p0 == p) return;
  rx = std::abs(rx);
  ry = std::abs(ry);
  if (rx == 0 || ry == 0) {
    line_to(p);
    return;
  }
  double phi = x_rotation_deg * kPi / 180.0;
  double cp = std::cos(phi), sp = std::sin(phi);
  double dx = (p0.x - p.x) / 2, dy = (p0.y - p.y) / 2;
  double x1 = cp * dx + sp * dy;
  double y1 = -sp * dx + cp * dy;
  double lambda = (x1 * x1) / (rx * rx) + (y1 * y1) / (ry * ry);
  if (lambda > 1) {
    double s = std::sqrt(lambda);
    rx *= s;
    ry *= s;
  }
  double num = rx * rx * ry * ry - rx * rx * y1 * y1 - ry * ry * x1 * x1;
  double den = rx * rx * y1 * y1 + ry * ry * x1 * x1;
  double coef = den == 0 ? 0 : std::sqrt(std::max(0.0, num / den));
  if (large_arc == sweep) coef = -coef;
  double cx1 = coef * rx * y1 / ry;
  double cy1 = -coef * ry * x1 / rx;
  double cx = cp * cx1 - sp * cy1 + (p0.x + p.x) / 2;
  double cy = sp * cx1 + cp * cy1 + (p0.y + p.y) / 2;

  auto angle = [](double ux, double uy, double vx, double vy) {
    return std::atan2(ux * vy - uy * vx, ux * vx + uy * vy);
  };
  double theta1 = angle(1, 0, (x1 - cx1) / rx, (y1 - cy1) / ry);
  double delta = angle((x1 - cx1) / rx, (y1 - cy1) / ry, (-x1 - cx1) / rx, (-y1 - cy1) / ry);
  if (!sweep && delta > 0) delta -= 2 * kPi;
  if (sweep && delta < 0) delta += 2 * kPi;

  int segments = std::max(1, static_cast<int>(std::ceil(std::abs(delta) / (kPi / 2) - 1e-9)));
  double step = delta / segments;
  double k = 4.0 / 3.0 * std::tan(step / 4);
  auto on_ellipse = [&](double t) {
    double x = rx * std::cos(t), y = ry * std::sin(t);
    return Point{cp * x - sp * y + cx, sp * x + cp * y + cy};
  };
  auto derivative = [&](double t) {
    double x = -rx * std::sin(t), y = ry * std::cos(t);
    return Point{cp * x - sp * y, sp * x + cp * y};
  };
  double t = theta1;
  for (int i = 0; i < segments; ++i) {
    double t2 = t + step;
    Point a = on_ellipse(t), b = on_ellipse(t2);
    Point da = derivative(t), db = derivative(t2);
    Point c1{a.x + k * da.x, a.y + k * da.y};
    Point c2{b.x - k * db.x, b.y - k * db.y};
    if (i == segments - 1) b = p;
    cubic_to(c1, c2, b);
    t = t2;
  }
}

void PathBuilder::close() {
  if (!has_open_) return;
  open_.closed = true;
  flush();
  cur_ = start_;
}

std::vector<Subpath> PathBuilder::finish() {
  flush();
  return std::move(done_);
}

// ---------------------------------------------------------------------------
// Stroking

Contour circle_contour(Point center, double radius) {
  int n = std::clamp(static_cast<int>(std::ceil(radius * 2)), 8, 360);
  Contour c;
  c.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double a = 2 * kPi * i / n;
    c.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return c;
}

namespace {

struct Dir {
  double x, y;
};

Dir unit(Point a, Point b) {
  double len = dist(a, b);
  return {(b.x - a.x) / len, (b.y - a.y) / len};
}

void add_cap(std::vector<Contour>& out, Point p, Dir d, double hw, LineCap cap, bool at_start) {
  if (cap == LineCap::Round) {
    push_piece(out, circle_contour(p, hw));
  } else if (cap == LineCap::Square) {
    double s = at_start ? -1 : 1;
    Point e{p.x + s * d.x * hw, p.y + s * d.y * hw};
    Dir n{-d.y, d.x};
    push_piece(out, {{p.x + n.x * hw, p.y + n.y * hw},
                     {e.x + n.x * hw, e.y + n.y * hw},
                     {e.x - n.x * hw, e.y - n.y * hw},
                     {p.x - n.x * hw, p.y - n.y * hw}});
  }
}

void add_join(std::vector<Contour>& out, Point v, Dir d0, Dir d1, const StrokeStyle& st, double hw) {
  double cross = d0.x * d1.y - d0.y * d1.x;
  double dot = d0.x * d1.x + d0.y * d1.y;
  if (std::abs(cross) < 1e-12 && dot > 0) return;
  if (st.join == LineJoin::Round) {
    push_piece(out, circle_contour(v, hw));
    return;
  }
  double side = cross > 0 ? -1 : 1;
  Dir n0{-d0.y, d0.x}, n1{-d1.y, d1.x};
  Point a{v.x + side * n0.x * hw, v.y + side * n0.y * hw};
  Point b{v.x + side * n1.x * hw, v.y + side * n1.y * hw};
  double nn = 1 + (n0.x * n1.x + n0.y * n1.y);
  if (st.join == LineJoin::Miter && nn > 1e-12) {
    double ratio = 2 / std::sqrt(2 * nn);
    if (ratio <= st.miter_limit) {
      Point m{v.x + side * hw * (n0.x + n1.x) / nn, v.y + side * hw * (n0.y + n1.y) / nn};
      push_piece(out, {v, a, m, b});
      return;
    }
  }
  push_piece(out, {v, a, b});
}

void stroke_polyline(std::vector<Contour>& out, const Contour& pts, bool closed, const StrokeStyle& st) {
  double hw = st.width / 2;
  if (pts.size() == 1) {
    if (st.cap == LineCap::Round) {
      push_piece(out, circle_contour(pts[0], hw));
    } else if (st.cap == LineCap::Square) {
      const Point& p = pts[0];
      push_piece(out, {{p.x - hw, p.y - hw}, {p.x + hw, p.y - hw}, {p.x + hw, p.y + hw}, {p.x - hw, p.y + hw}});
    }
    return;
  }
  std::size_t n = pts.size();
  std::size_t segs = closed ? n : n - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    Point p = pts[i], q = pts[(i + 1) % n];
    Dir d = unit(p, q);
    Dir nrm{-d.y, d.x};
    push_piece(out, {{p.x + nrm.x * hw, p.y + nrm.y * hw},
                     {q.x + nrm.x * hw, q.y + nrm.y * hw},
                     {q.x - nrm.x * hw, q.y - nrm.y * hw},
                     {p.x - nrm.x * hw, p.y - nrm.y * hw}});
  }
  std::size_t first_join = closed ? 0 : 1;
  std::size_t last_join = closed ? n : n - 1;
  for (std::size_t i = first_join; i < last_join; ++i) {
    Point prev = pts[(i + n - 1) % n], v = pts[i], next = pts[(i + 1) % n];
    add_join(out, v, unit(prev, v), unit(v, next), st, hw);
  }
  if (!closed) {
    add_cap(out, pts[0], unit(pts[0], pts[1]), hw, st.cap, true);
    add_cap(out, pts[n - 1], unit(pts[n - 2], pts[n - 1]), hw, st.cap, false);
  }
}

// Splits a polyline into dash pieces.
std::vector<Contour> apply_dashes(const Contour& pts, bool closed, const StrokeStyle& st) {
  Contour path = pts;
  if (closed) path.push_back(pts.front());
  std::vector<Contour> pieces;
  double total = 0;
  for (double d : st.dashes) total += d;
  std::size_t idx = 0;
  double remaining = st.dashes[0];
  bool on = true;
  double offset = std::fmod(st.dash_offset, total);
  if (offset < 0) offset += total;
  while (offset > 0) {
    if (offset >= remaining) {
      offset -= remaining;
      idx = (idx + 1) % st.dashes.size();
      remaining = st.dashes[idx];
      on = !on;
    } else {
      remaining -= offset;
      offset = 0;
    }
  }
  Contour current;
  if (on) current.push_back(path[0]);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    Point a = path[i], b = path[i + 1];
    double len = dist(a, b);
    double pos = 0;
    while (len - pos > remaining) {
      pos += remaining;
      Point cut = lerp(a, b, pos / len);
      if (on) {
        current.push_back(cut);
        pieces.push_back(std::move(current));
        current.clear();
      } else {
        current = {cut};
      }
      on = !on;
      idx = (idx + 1) % st.dashes.size();
      remaining = st.dashes[idx];
    }
    remaining -= len - pos;
    if (on) current.push_back(b);
  }
  if (on && current.size() >= 2) pieces.push_back(std::move(current));
  return pieces;
}

Contour dedupe(const Contour& in) {
  Contour out;
  for (const Point& p : in) {
    if (out.empty() || dist(out.back(), p) > 1e-9) out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<Contour> stroke_outline(const std::vector<Subpath>& paths, const StrokeStyle& style) {
  std::vector<Contour> out;
  if (!(style.width > 0)) return out;
  double dash_total = 0;
  for (double d : style.dashes) dash_total += d;
  bool dashed = !style.dashes.empty() && dash_total > 0;
  for (const auto& sp : paths) {
    Contour pts = dedupe(sp.points);
    bool closed = sp.closed;
    if (closed && pts.size() > 1 && dist(pts.front(), pts.back()) <= 1e-9) pts.pop_back();
    if (pts.empty()) continue;
    if (closed && pts.size() < 3) closed = false;
    if (dashed && pts.size() > 1) {
      for (const auto& piece : apply_dashes(pts, closed, style)) {
        Contour clean = dedupe(piece);
        if (!clean.empty()) stroke_polyline(out, clean, false, style);
      }
    } else {
      stroke_polyline(out, pts, closed, style);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Glyphs

namespace {

// Decodes one code point; invalid sequences yield U+FFFD and advance 1.
std::uint32_t next_code_point(std::string_view s, std::size_t& i) {
  auto c = static_cast<unsigned char>(s[i]);
  int len = c < 0x80 ? 1 : (c & 0xe0) == 0xc0 ? 2 : (c & 0xf0) == 0xe0 ? 3 : (c & 0xf8) == 0xf0 ? 4 : 0;
  if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) {
    ++i;
    return 0xfffd;
  }
  std::uint32_t cp = len == 1 ? c : len == 2 ? (c & 0x1f) : len == 3 ? (c & 0x0f) : (c & 0x07);
  for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
  i += static_cast<std::size_t>(len);
  return cp;
}

int glyph_index(std::uint32_t cp) {
  if (cp == '\t' || cp == '\n' || cp == '\r') cp = ' ';
  if (cp >= 0x20 && cp < 0x7f) return static_cast<int>(cp - 0x20);
  return '?' - 0x20;
}

}  // namespace

std::size_t glyph_count(std::string_view utf8) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < utf8.size();) {
    next_code_point(utf8, i);
    ++n;
  }
  return n;
}

Box item_bounds(const DrawItem& item) {
  if (const auto* f = std::get_if<FillItem>(&item)) {
    Box b{1e300, 1e300, -1e300, -1e300};
    for (const auto& c : f->contours) {
      for (const auto& p : c) {
        b.x0 = std::min(b.x0, p.x), b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x), b.y1 = std::max(b.y1, p.y);
      }
    }
    return b;
  }
  const auto& t = std::get<TextItem>(item);
  double width = kAdvanceRatio * t.size * static_cast<double>(glyph_count(t.text));
  double top = t.baseline - t.size * kGlyphBaseline / kGlyphEm;
  return {t.x, top, t.x + width, top + t.size * kGlyphCellHeight / kGlyphEm};
}

// ---------------------------------------------------------------------------
// Rasterizer

namespace {

struct Edge {
  double y0, y1;  // y0 < y1
  double x0;      // x at y0
  double dxdy;
  int dir;
};

struct Prepared {
  const DrawItem* item;
  // Supersampled row/column limits after clipping to the item's clip box and bounds.
  long row0, row1, col0, col1;
  std::vector<Edge> edges;
};

struct Strip {
  std::vector<std::uint8_t> px;
  int width;  // supersampled columns
  long row0;  // first supersampled row held
  int rows;
  std::uint8_t* at(long row, long col) { return &px[(static_cast<std::size_t>(row - row0) * width + col) * 4]; }
};

inline void blend(std::uint8_t* dst, Rgba c) {
  if (c.a == 255) {
    dst[0] = c.r, dst[1] = c.g, dst[2] = c.b, dst[3] = 255;
    return;
  }
  unsigned a = c.a, ia = 255 - a;
  dst[0] = static_cast<std::uint8_t>((c.r * a + dst[0] * ia + 127) / 255);
  dst[1] = static_cast<std::uint8_t>((c.g * a + dst[1] * ia + 127) / 255);
  dst[2] = static_cast<std::uint8_t>((c.b * a + dst[2] * ia + 127) / 255);
  dst[3] = static_cast<std::uint8_t>(a + (dst[3] * ia + 127) / 255);
}

long first_sample(double edge) { return static_cast<long>(std::ceil(edge - 0.5)); }

Prepared prepare(const DrawItem& item, int ss, int sw, long sh) {
  Prepared p{&item, 0, 0, 0, 0, {}};
  Box b = item_bounds(item);
  Box clip = std::visit([](const auto& it) { return it.clip; }, item);
  Box eff = b.intersected(clip);
  if (eff.empty()) {
    p.row1 = p.row0;
    return p;
  }
  p.row0 = std::max(0L, first_sample(eff.y0 * ss));
  p.row1 = std::min(sh, first_sample(eff.y1 * ss));
  p.col0 = std::max(0L, first_sample(eff.x0 * ss));
  p.col1 = std::min(static_cast<long>(sw), first_sample(eff.x1 * ss));
  if (const auto* f = std::get_if<FillItem>(&item)) {
    for (const auto& c : f->contours) {
      for (std::size_t i = 0, n = c.size(); i < n; ++i) {
        Point a{c[i].x * ss, c[i].y * ss};
        Point q{c[(i + 1) % n].x * ss, c[(i + 1) % n].y * ss};
        if (a.y == q.y) continue;
        int dir = q.y > a.y ? 1 : -1;
        if (dir < 0) std::swap(a, q);
        p.edges.push_back({a.y, q.y, a.x, (q.x - a.x) / (q.y - a.y), dir});
      }
    }
  }
  return p;
}

void fill_rows(const Prepared& p, const FillItem& f, Strip& strip) {
  long r0 = std::max(p.row0, strip.row0);
  long r1 = std::min(p.row1, strip.row0 + strip.rows);
  std::vector<std::pair<double, int>> xs;
  for (long row = r0; row < r1; ++row) {
    double yc = row + 0.5;
    xs.clear();
    for (const auto& e : p.edges) {
      if (yc >= e.y0 && yc < e.y1) xs.emplace_back(e.x0 + (yc - e.y0) * e.dxdy, e.dir);
    }
    if (xs.size() < 2) continue;
    std::sort(xs.begin(), xs.end());
    int winding = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      winding += f.even_odd ? 1 : xs[i].second;
      bool inside = f.even_odd ? (winding & 1) != 0 : winding != 0;
      if (!inside) continue;
      long c0 = std::max(p.col0, first_sample(xs[i].first));
      long c1 = std::min(p.col1, first_sample(xs[i + 1].first));
      for (long col = c0; col < c1; ++col) blend(strip.at(row, col), f.color);
    }
  }
}

void draw_text_rows(const Prepared& p, const TextItem& t, int ss, Strip& strip) {
  long r0 = std::max(p.row0, strip.row0);
  long r1 = std::min(p.row1, strip.row0 + strip.rows);
  if (r0 >= r1) return;
  const auto& glyphs = t.bold ? kBoldGlyphs : kRegularGlyphs;
  double scale = t.size * ss / kGlyphEm;  // supersampled pixels per master pixel
  double top = (t.baseline - t.size * kGlyphBaseline / kGlyphEm) * ss;
  double advance = kAdvanceRatio * t.size * ss;
  std::size_t i = 0;
  for (std::size_t k = 0; i < t.text.size(); ++k) {
    int g = glyph_index(next_code_point(t.text, i));
    double left = t.x * ss + advance * static_cast<double>(k);
    long c0 = std::max(p.col0, first_sample(left));
    long c1 = std::min(p.col1, first_sample(left + kGlyphCellWidth * scale));
    for (long row = r0; row < r1; ++row) {
      long my = static_cast<long>(std::floor((row + 0.5 - top) / scale));
      if (my < 0 || my >= kGlyphCellHeight) continue;
      std::uint32_t bits = glyphs[g][my];
      if (bits == 0) continue;
      for (long col = c0; col < c1; ++col) {
        long mx = static_cast<long>(std::floor((col + 0.5 - left) / scale));
        if (mx < 0 || mx >= kGlyphCellWidth) continue;
        if (bits & (1u << (kGlyphCellWidth - 1 - mx))) blend(strip.at(row, col), t.color);
      }
    }
  }
}

}  // namespace

RasterImage rasterize(const std::vector<DrawItem>& items, int width, int height, int supersample, Rgba background) {
  RasterImage out(width, height, background);
  out.dpi_scale = supersample;
  const int ss = std::max(1, supersample);
  const int sw = width * ss;
  const long sh = static_cast<long>(height) * ss;

  std::vector<Prepared> prepared;
  prepared.reserve(items.size());
  for (const auto& item : items) {
    Prepared p = prepare(item, ss, sw, sh);
    if (p.row1 > p.row0 && p.col1 > p.col0) prepared.push_back(std::move(p));
  }

  constexpr int kStripRows = 16;
  Strip strip;
  strip.width = sw;
  for (int y0 = 0; y0 < height; y0 += kStripRows) {
    int rows_out = std::min(kStripRows, height - y0);
    strip.row0 = static_cast<long>(y0) * ss;
    strip.rows = rows_out * ss;
    strip.px.resize(static_cast<std::size_t>(sw) * strip.rows * 4);
    for (std::size_t i = 0; i < strip.px.size(); i += 4) {
      strip.px[i] = background.r, strip.px[i + 1] = background.g;
      strip.px[i + 2] = background.b, strip.px[i + 3] = background.a;
    }
    for (const auto& p : prepared) {
      if (p.row1 <= strip.row0 || p.row0 >= strip.row0 + strip.rows) continue;
      if (const auto* f = std::get_if<FillItem>(p.item)) {
        fill_rows(p, *f, strip);
      } else {
        draw_text_rows(p, std::get<TextItem>(*p.item), ss, strip);
      }
    }
    const unsigned n = static_cast<unsigned>(ss * ss);
    for (int y = 0; y < rows_out; ++y) {
      for (int x = 0; x < width; ++x) {
        unsigned sum[4] = {0, 0, 0, 0};
        for (int dy = 0; dy < ss; ++dy) {
          const std::uint8_t* src = &strip.px[(static_cast<std::size_t>(y * ss + dy) * sw + x * ss) * 4];
          for (int dx = 0; dx < ss; ++dx, src += 4) {
            sum[0] += src[0], sum[1] += src[1], sum[2] += src[2], sum[3] += src[3];
          }
        }
        std::uint8_t* dst = &out.pixels[(static_cast<std::size_t>(y0 + y) * width + x) * 4];
        for (int c = 0; c < 4; ++c) dst[c] = static_cast<std::uint8_t>((sum[c] + n / 2) / n);
      }
    }
  }
  return out;
}

}  // namespace canvascot::raster
