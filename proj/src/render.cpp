#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "canvascot/geometry.hpp"
#include "canvascot/render.hpp"
#include "raster.hpp"

namespace canvascot {
namespace {

using raster::Contour;
using raster::DrawItem;
using raster::FillItem;
using raster::PathBuilder;
using raster::Subpath;
using raster::TextItem;
using Node = DomState::Node;

constexpr double kBlockGap = 12;
constexpr double kNestedGap = 6;
constexpr double kPadY = 10;
constexpr double kPadX = 14;
constexpr double kCardRadius = 12;
constexpr double kListIndent = 16;
constexpr double kCellPadY = 4;
constexpr double kCellPadX = 6;
constexpr double kInf = 1e9;
const Rgba kGridColor{0x66, 0x66, 0x66, 255};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Looks up a presentation property: inline style declarations win over the
// attribute of the same name.
std::optional<std::string> property(const Node& n, std::string_view name) {
  if (const auto* style = n.attrs.find("style")) {
    std::string_view rest = *style;
    std::optional<std::string> hit;
    while (!rest.empty()) {
      auto semi = rest.find(';');
      std::string_view decl = rest.substr(0, semi);
      rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
      auto colon = decl.find(':');
      if (colon == std::string_view::npos) continue;
      if (lower(trim(decl.substr(0, colon))) == name) hit = std::string(trim(decl.substr(colon + 1)));
    }
    if (hit) return hit;
  }
  if (const auto* v = n.attrs.find(name)) return std::string(trim(*v));
  return std::nullopt;
}

// "16", "16px", "16.5 px"
std::optional<double> length(std::optional<std::string> v) {
  if (!v) return std::nullopt;
  std::string_view s = trim(*v);
  if (s.size() > 2 && lower(s.substr(s.size() - 2)) == "px") s = trim(s.substr(0, s.size() - 2));
  return parse_decimal(s);
}

std::optional<double> number_attr(const Node& n, std::string_view name) {
  if (const auto* v = n.attrs.find(name)) return parse_decimal(*v);
  return std::nullopt;
}

std::uint8_t scaled_alpha(std::uint8_t a, double factor) {
  factor = std::clamp(factor, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(a * factor));
}

// Collapses whitespace runs to single spaces.
std::string collapse(std::string_view s, bool strip_ends) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
      space = true;
      continue;
    }
    if (space && (!out.empty() || !strip_ends)) out += ' ';
    space = false;
    out += c;
  }
  if (space && !strip_ends) out += ' ';
  return out;
}

Contour rounded_rect(double x, double y, double w, double h, double rx, double ry, const Affine& m) {
  PathBuilder pb(m);
  if (rx <= 0 || ry <= 0) {
    pb.move_to({x, y});
    pb.line_to({x + w, y});
    pb.line_to({x + w, y + h});
    pb.line_to({x, y + h});
    pb.close();
  } else {
    pb.move_to({x + rx, y});
    pb.line_to({x + w - rx, y});
    pb.arc_to(rx, ry, 0, false, true, {x + w, y + ry});
    pb.line_to({x + w, y + h - ry});
    pb.arc_to(rx, ry, 0, false, true, {x + w - rx, y + h});
    pb.line_to({x + rx, y + h});
    pb.arc_to(rx, ry, 0, false, true, {x, y + h - ry});
    pb.line_to({x, y + ry});
    pb.arc_to(rx, ry, 0, false, true, {x + rx, y});
    pb.close();
  }
  auto paths = pb.finish();
  return paths.empty() ? Contour{} : paths.front().points;
}

struct TextStyle {
  double size = 16;
  bool bold = false;
  Rgba color{0, 0, 0, 255};
};

double snap_font_size(double px) {
  static constexpr double kSizes[] = {14, 16, 17, 18};
  double best = 16;
  double best_d = kInf;
  for (double s : kSizes) {
    double d = std::abs(s - px);
    if (d <= best_d) best = s, best_d = d;
  }
  return best;
}

bool is_bold_weight(std::string_view w) {
  std::string v = lower(trim(w));
  if (v == "bold" || v == "bolder") return true;
  auto n = parse_decimal(v);
  return n && *n >= 600;
}

struct SvgStyle {
  Rgba fill{0, 0, 0, 255};
  Rgba stroke{0, 0, 0, 0};
  double stroke_width = 1;
  double fill_opacity = 1;
  double stroke_opacity = 1;
  double opacity = 1;  // accumulated group opacity
  double font_size = 16;
  bool bold = false;
  std::string anchor = "start";
  raster::LineCap cap = raster::LineCap::Butt;
  raster::LineJoin join = raster::LineJoin::Miter;
  double miter_limit = 4;
  std::vector<double> dashes;
  double dash_offset = 0;
  bool even_odd = false;
};

SvgStyle resolve_svg_style(const Node& n, SvgStyle st) {
  if (auto v = property(n, "fill")) {
    if (auto c = parse_color(*v)) st.fill = *c;
  }
  if (auto v = property(n, "stroke")) {
    if (auto c = parse_color(*v)) st.stroke = *c;
  }
  if (auto w = length(property(n, "stroke-width")); w && *w >= 0) st.stroke_width = *w;
  if (auto v = length(property(n, "fill-opacity"))) st.fill_opacity = std::clamp(*v, 0.0, 1.0);
  if (auto v = length(property(n, "stroke-opacity"))) st.stroke_opacity = std::clamp(*v, 0.0, 1.0);
  if (auto v = length(property(n, "opacity"))) st.opacity *= std::clamp(*v, 0.0, 1.0);
  if (auto v = length(property(n, "font-size")); v && *v > 0) st.font_size = *v;
  if (auto v = property(n, "font-weight")) st.bold = is_bold_weight(*v);
  if (auto v = property(n, "text-anchor")) {
    std::string a = lower(*v);
    if (a == "start" || a == "middle" || a == "end") st.anchor = a;
  }
  if (auto v = property(n, "stroke-linecap")) {
    std::string a = lower(*v);
    if (a == "butt") st.cap = raster::LineCap::Butt;
    if (a == "round") st.cap = raster::LineCap::Round;
    if (a == "square") st.cap = raster::LineCap::Square;
  }
  if (auto v = property(n, "stroke-linejoin")) {
    std::string a = lower(*v);
    if (a == "miter") st.join = raster::LineJoin::Miter;
    if (a == "round") st.join = raster::LineJoin::Round;
    if (a == "bevel") st.join = raster::LineJoin::Bevel;
  }
  if (auto v = length(property(n, "stroke-miterlimit")); v && *v >= 1) st.miter_limit = *v;
  if (auto v = property(n, "stroke-dasharray")) {
    if (lower(*v) == "none") {
      st.dashes.clear();
    } else if (auto list = parse_number_list(*v)) {
      bool ok = std::all_of(list->begin(), list->end(), [](double d) { return d >= 0; });
      if (ok) {
        st.dashes = *list;
        if (st.dashes.size() % 2 == 1) st.dashes.insert(st.dashes.end(), list->begin(), list->end());
      }
    }
  }
  if (auto v = length(property(n, "stroke-dashoffset"))) st.dash_offset = *v;
  if (auto v = property(n, "fill-rule")) st.even_odd = lower(*v) == "evenodd";
  return st;
}

Box bounds_of(const std::vector<DrawItem>& items, std::size_t from) {
  Box b{kInf, kInf, -kInf, -kInf};
  bool any = false;
  for (std::size_t i = from; i < items.size(); ++i) {
    Box clip = std::visit([](const auto& it) { return it.clip; }, items[i]);
    Box ib = raster::item_bounds(items[i]).intersected(clip);
    if (ib.empty()) continue;
    b = any ? b.united(ib) : ib;
    any = true;
  }
  return any ? b : Box{};
}

bool is_inline_tag(std::string_view tag) { return tag == kTextTag || tag == "span" || tag == "strong"; }

bool is_svg_primitive(std::string_view tag) {
  return tag == "g" || tag == "rect" || tag == "circle" || tag == "ellipse" || tag == "line" || tag == "polyline" ||
         tag == "polygon" || tag == "path" || tag == "text";
}

class Layout {
 public:
  Layout(const DomState& state, const RenderOptions& options) : s_(state), opt_(options) {}

  double run() {
    Box clip{0, -kInf, opt_.canvas_width, kInf};
    return layout_flow(s_.body(), 0, 0, opt_.canvas_width, 0, TextStyle{}, clip);
  }

  std::vector<DrawItem> items;
  std::vector<ElementBox> boxes;

 private:
  static constexpr std::size_t kNoBox = std::numeric_limits<std::size_t>::max();

  std::size_t open_box(NodeHandle h) {
    const Node& n = s_.node(h);
    auto id = n.id();
    if (!id) return kNoBox;
    boxes.push_back(ElementBox{std::string(*id), n.tag, Box{}, 0});
    return boxes.size() - 1;
  }

  void close_box(std::size_t idx, Box b) {
    if (idx == kNoBox) return;
    boxes[idx].box = b;
    boxes[idx].subtree_end = boxes.size();
  }

  // ---- HTML flow --------------------------------------------------------

  TextStyle html_style(const Node& n, TextStyle st) const {
    if (n.tag == "strong") st.bold = true;
    if (auto px = length(property(n, "font-size")); px && *px > 0) st.size = snap_font_size(*px);
    if (auto w = property(n, "font-weight")) st.bold = is_bold_weight(*w);
    if (auto c = property(n, "color")) {
      if (auto rgba = parse_color(*c)) st.color = *rgba;
    }
    return st;
  }

  std::optional<Rgba> background(const Node& n) const {
    for (auto name : {"background-color", "background", "bgcolor"}) {
      if (auto v = property(n, name)) {
        if (auto c = parse_color(*v); c && c->a > 0) return c;
      }
    }
    return std::nullopt;
  }

  struct Run {
    std::string text;
    TextStyle style;
    std::vector<std::size_t> owners;  // open boxes of inline ancestors
  };

  void collect_runs(NodeHandle h, const TextStyle& st, std::vector<std::size_t>& owners, std::vector<Run>& out) {
    const Node& n = s_.node(h);
    if (n.tag == kTextTag) {
      out.push_back({n.text.value_or(""), st, owners});
      return;
    }
    TextStyle inner = html_style(n, st);
    std::size_t idx = open_box(h);
    if (idx != kNoBox) owners.push_back(idx);
    if (n.text) out.push_back({*n.text, inner, owners});
    for (NodeHandle c : n.children) collect_runs(c, inner, owners, out);
    if (idx != kNoBox) {
      owners.pop_back();
      boxes[idx].subtree_end = boxes.size();
    }
  }

  // Wraps inline runs into lines. Returns the paragraph height.
  double layout_paragraph(const std::vector<Run>& runs, double x, double y, double width, const Box& clip) {
    struct Piece {
      std::string text;
      const Run* run;
      double x = 0;
      double w = 0;
    };
    std::vector<Piece> line;
    double cursor = 0;
    double top = y;
    auto flush = [&] {
      if (line.empty()) return;
      double max_size = 0;
      for (const auto& p : line) max_size = std::max(max_size, p.run->style.size);
      double baseline = top + max_size;
      double bottom = top + raster::kLineHeightRatio * max_size;
      for (const auto& p : line) {
        items.push_back(TextItem{p.text, x + p.x, baseline, p.run->style.size, p.run->style.bold, p.run->style.color, clip});
        Box pb{x + p.x, top, x + p.x + p.w, bottom};
        for (std::size_t o : p.run->owners) boxes[o].box = boxes[o].box.empty() ? pb : boxes[o].box.united(pb);
      }
      top = bottom;
      line.clear();
      cursor = 0;
    };
    bool pending_space = false;
    for (const auto& run : runs) {
      double adv = raster::kAdvanceRatio * run.style.size;
      std::size_t i = 0;
      const std::string& t = run.text;
      while (i < t.size()) {
        if (std::isspace(static_cast<unsigned char>(t[i]))) {
          pending_space = true;
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j < t.size() && !std::isspace(static_cast<unsigned char>(t[j]))) ++j;
        std::string word = t.substr(i, j - i);
        i = j;
        double space = pending_space && !line.empty() ? adv : 0;
        pending_space = false;
        double w = adv * static_cast<double>(raster::glyph_count(word));
        if (!line.empty() && cursor + space + w > width) {
          flush();
          space = 0;
        }
        // A word wider than the line is broken between code points.
        while (line.empty() && w > width && raster::glyph_count(word) > 1) {
          std::size_t fit = std::max<std::size_t>(1, static_cast<std::size_t>(width / adv));
          std::size_t cut = 0;
          for (std::size_t k = 0; k < fit && cut < word.size(); ++k) {
            ++cut;
            while (cut < word.size() && (static_cast<unsigned char>(word[cut]) & 0xc0) == 0x80) ++cut;
          }
          std::string head = word.substr(0, cut);
          line.push_back({head, &run, 0, adv * static_cast<double>(raster::glyph_count(head))});
          flush();
          word = word.substr(cut);
          w = adv * static_cast<double>(raster::glyph_count(word));
        }
        line.push_back({word, &run, cursor + space, w});
        cursor += space + w;
      }
    }
    flush();
    return top - y;
  }

  // Lays out the children of `h` (and its leaf text) as a vertical flow.
  double layout_flow(NodeHandle h, double x, double y, double width, int level, const TextStyle& st,
                     const Box& clip) {
    const Node& n = s_.node(h);
    double gap = level == 0 ? kBlockGap : kNestedGap;
    double cursor = y;
    bool first = true;
    auto place = [&](double height) {
      if (height <= 0) return;
      cursor += height;
      first = false;
    };
    auto start = [&] { return first ? cursor : cursor + gap; };

    if (n.text) {
      std::vector<Run> runs{{*n.text, st, {}}};
      place(layout_paragraph(runs, x, start(), width, clip));
    }
    std::vector<Run> runs;
    std::vector<std::size_t> owners;
    auto flush_runs = [&] {
      if (runs.empty()) return;
      bool blank = std::all_of(runs.begin(), runs.end(), [](const Run& r) { return collapse(r.text, true).empty(); });
      if (!blank) {
        double top = start();
        double hgt = layout_paragraph(runs, x, top, width, clip);
        if (hgt > 0) cursor = top + hgt, first = false;
      }
      runs.clear();
    };
    for (NodeHandle c : n.children) {
      const Node& cn = s_.node(c);
      if (is_inline_tag(cn.tag)) {
        collect_runs(c, st, owners, runs);
        continue;
      }
      flush_runs();
      double top = start();
      double hgt = layout_block(c, x, top, width, level, st, clip);
      if (hgt > 0) cursor = top + hgt, first = false;
    }
    flush_runs();
    return cursor - y;
  }

  double layout_block(NodeHandle h, double x, double y, double width, int level, const TextStyle& inherited,
                      const Box& clip) {
    const Node& n = s_.node(h);
    if (n.tag == "svg") return layout_svg_block(h, x, y, width, clip);
    if (is_svg_primitive(n.tag)) return layout_loose_svg(h, x, y, width, clip);

    TextStyle st = html_style(n, inherited);
    std::size_t idx = open_box(h);
    double height = 0;
    if (n.tag == "ul") {
      height = layout_list(h, x, y, width, level, st, clip);
    } else if (n.tag == "table") {
      height = layout_table(h, x, y, width, level, st, clip);
    } else {
      auto bg = background(n);
      bool padded = bg.has_value() || (level == 0 && n.tag == "div");
      double px = padded ? kPadX : 0, py = padded ? kPadY : 0;
      std::size_t slot = items.size();
      if (bg) items.emplace_back(FillItem{});
      double inner = layout_flow(h, x + px, y + py, std::max(0.0, width - 2 * px), level + 1, st, clip);
      height = inner + 2 * py;
      if (bg) {
        double r = std::min({kCardRadius, width / 2, height / 2});
        items[slot] = FillItem{{rounded_rect(x, y, width, height, r, r, Affine{})}, false, *bg, clip};
      }
    }
    close_box(idx, Box{x, y, x + width, y + height});
    return height;
  }

  double layout_list(NodeHandle h, double x, double y, double width, int level, const TextStyle& st,
                     const Box& clip) {
    const Node& n = s_.node(h);
    double cursor = y;
    bool first = true;
    for (NodeHandle c : n.children) {
      const Node& cn = s_.node(c);
      double top = first ? cursor : cursor + kNestedGap;
      double hgt = 0;
      if (cn.tag == "li") {
        TextStyle ls = html_style(cn, st);
        std::size_t idx = open_box(c);
        std::size_t bullet = items.size();
        items.emplace_back(FillItem{});
        hgt = layout_flow(c, x + kListIndent, top, std::max(0.0, width - kListIndent), level + 1, ls, clip);
        if (hgt > 0) {
          double cy = top + raster::kLineHeightRatio * ls.size / 2;
          items[bullet] = FillItem{{raster::circle_contour({x + 7, cy}, 3)}, false, ls.color, clip};
        }
        close_box(idx, Box{x, top, x + width, top + hgt});
      } else if (is_inline_tag(cn.tag)) {
        std::vector<Run> runs;
        std::vector<std::size_t> owners;
        collect_runs(c, st, owners, runs);
        hgt = layout_paragraph(runs, x + kListIndent, top, std::max(0.0, width - kListIndent), clip);
      } else {
        hgt = layout_block(c, x + kListIndent, top, std::max(0.0, width - kListIndent), level + 1, st, clip);
      }
      if (hgt > 0) cursor = top + hgt, first = false;
    }
    return cursor - y;
  }

  double layout_table(NodeHandle h, double x, double y, double width, int level, const TextStyle& st,
                      const Box& clip) {
    const Node& n = s_.node(h);
    std::vector<NodeHandle> rows;
    std::size_t columns = 0;
    for (NodeHandle c : n.children) {
      const Node& cn = s_.node(c);
      if (cn.tag != "tr") continue;
      rows.push_back(c);
      std::size_t cells = 0;
      for (NodeHandle d : cn.children) cells += s_.node(d).tag == "td" ? 1 : 0;
      columns = std::max(columns, cells);
    }
    if (rows.empty()) return 0;
    columns = std::max<std::size_t>(columns, 1);
    double colw = width / static_cast<double>(columns);
    double cursor = y;
    std::vector<double> row_lines{y};
    for (NodeHandle r : rows) {
      const Node& rn = s_.node(r);
      TextStyle rs = html_style(rn, st);
      std::size_t ridx = open_box(r);
      double row_height = 0;
      std::size_t col = 0;
      std::vector<std::pair<std::size_t, double>> cell_boxes;
      for (NodeHandle d : rn.children) {
        const Node& dn = s_.node(d);
        if (dn.tag != "td") continue;
        double cx = x + colw * static_cast<double>(col);
        std::size_t didx = open_box(d);
        Box cell_clip = clip.intersected(Box{cx, -kInf, cx + colw, kInf});
        double inner = layout_flow(d, cx + kCellPadX, cursor + kCellPadY, std::max(0.0, colw - 2 * kCellPadX),
                                   level + 1, html_style(dn, rs), cell_clip);
        row_height = std::max(row_height, inner + 2 * kCellPadY);
        cell_boxes.emplace_back(didx, cx);
        ++col;
      }
      for (auto [didx, cx] : cell_boxes) close_box(didx, Box{cx, cursor, cx + colw, cursor + row_height});
      close_box(ridx, Box{x, cursor, x + width, cursor + row_height});
      cursor += row_height;
      row_lines.push_back(cursor);
    }
    for (std::size_t i = 0; i < row_lines.size(); ++i) {
      double ly = i + 1 == row_lines.size() ? row_lines[i] - 1 : row_lines[i];
      items.push_back(FillItem{{rounded_rect(x, ly, width, 1, 0, 0, Affine{})}, false, kGridColor, clip});
    }
    for (std::size_t k = 0; k <= columns; ++k) {
      double lx = k == columns ? x + width - 1 : x + colw * static_cast<double>(k);
      items.push_back(FillItem{{rounded_rect(lx, y, 1, cursor - y, 0, 0, Affine{})}, false, kGridColor, clip});
    }
    return cursor - y;
  }

  // ---- SVG -------------------------------------------------------------

  struct Viewport {
    double w = 0, h = 0;
    Affine m;  // user space of the contents -> canvas
  };

  Viewport svg_viewport(const Node& n, const Affine& outer, double x, double y, double default_w) {
    std::optional<std::vector<double>> vb;
    if (const auto* v = n.attrs.find("viewBox")) {
      vb = parse_number_list(*v);
      if (vb && (vb->size() != 4 || (*vb)[2] <= 0 || (*vb)[3] <= 0)) vb.reset();
    }
    auto w = number_attr(n, "width");
    auto hh = number_attr(n, "height");
    Viewport vp;
    vp.w = w && *w >= 0 ? *w : vb ? (*vb)[2] : default_w;
    vp.h = hh && *hh >= 0 ? *hh : vb ? vp.w * (*vb)[3] / (*vb)[2] : 150;
    Affine m = outer.then_after(Affine::translate(x, y));
    if (vb) {
      double s = std::min(vp.w / (*vb)[2], vp.h / (*vb)[3]);
      double tx = (vp.w - (*vb)[2] * s) / 2 - (*vb)[0] * s;
      double ty = (vp.h - (*vb)[3] * s) / 2 - (*vb)[1] * s;
      m = m.then_after(Affine::translate(tx, ty)).then_after(Affine::scale(s, s));
    }
    vp.m = m;
    return vp;
  }

  double layout_svg_block(NodeHandle h, double x, double y, double width, const Box& clip) {
    const Node& n = s_.node(h);
    std::size_t idx = open_box(h);
    Viewport vp = svg_viewport(n, Affine{}, x, y, std::min(300.0, width));
    Box view{x, y, x + vp.w, y + vp.h};
    Box inner_clip = clip.intersected(view);
    SvgStyle st = resolve_svg_style(n, SvgStyle{});
    for (NodeHandle c : n.children) draw_svg(c, vp.m, st, inner_clip);
    close_box(idx, view);
    return vp.h;
  }

  // An SVG primitive placed directly in HTML flow: drawn in a viewport of
  // the container's width whose height is the primitive's extent.
  double layout_loose_svg(NodeHandle h, double x, double y, double width, const Box& clip) {
    std::size_t first = items.size();
    Box area = clip.intersected(Box{x, y, x + width, kInf});
    draw_svg(h, Affine::translate(x, y), SvgStyle{}, area);
    Box b = bounds_of(items, first);
    return b.empty() ? 0 : std::max(0.0, std::ceil(b.y1 - y));
  }

  void paint(std::vector<Subpath> paths, const SvgStyle& st, const Affine& m, const Box& clip, bool fillable) {
    if (fillable && st.fill.a > 0) {
      FillItem f;
      f.even_odd = st.even_odd;
      f.color = st.fill;
      f.color.a = scaled_alpha(st.fill.a, st.opacity * st.fill_opacity);
      f.clip = clip;
      for (const auto& sp : paths) {
        if (sp.points.size() >= 3) f.contours.push_back(sp.points);
      }
      if (f.color.a > 0 && !f.contours.empty()) items.push_back(std::move(f));
    }
    if (st.stroke.a > 0 && st.stroke_width > 0) {
      double k = m.scale_factor();
      raster::StrokeStyle ss;
      ss.width = st.stroke_width * k;
      ss.cap = st.cap;
      ss.join = st.join;
      ss.miter_limit = st.miter_limit;
      for (double d : st.dashes) ss.dashes.push_back(d * k);
      ss.dash_offset = st.dash_offset * k;
      FillItem f;
      f.contours = raster::stroke_outline(paths, ss);
      f.color = st.stroke;
      f.color.a = scaled_alpha(st.stroke.a, st.opacity * st.stroke_opacity);
      f.clip = clip;
      if (f.color.a > 0 && !f.contours.empty()) items.push_back(std::move(f));
    }
  }

  static void ellipse_path(PathBuilder& pb, double cx, double cy, double rx, double ry) {
    pb.move_to({cx + rx, cy});
    pb.arc_to(rx, ry, 0, false, true, {cx - rx, cy});
    pb.arc_to(rx, ry, 0, false, true, {cx + rx, cy});
    pb.close();
  }

  static void trace_path(PathBuilder& pb, const std::vector<PathCommand>& cmds) {
    Point cur{0, 0}, start{0, 0}, last_ctrl{0, 0};
    char prev = 'M';
    for (const auto& c : cmds) {
      bool rel = std::islower(static_cast<unsigned char>(c.op)) != 0;
      char op = static_cast<char>(std::toupper(static_cast<unsigned char>(c.op)));
      const auto& a = c.args;
      auto pt = [&](std::size_t i) { return rel ? Point{cur.x + a[i], cur.y + a[i + 1]} : Point{a[i], a[i + 1]}; };
      switch (op) {
        case 'M':
          cur = start = pt(0);
          pb.move_to(cur);
          break;
        case 'L':
          cur = pt(0);
          pb.line_to(cur);
          break;
        case 'H':
          cur.x = rel ? cur.x + a[0] : a[0];
          pb.line_to(cur);
          break;
        case 'V':
          cur.y = rel ? cur.y + a[0] : a[0];
          pb.line_to(cur);
          break;
        case 'C': {
          Point c1 = pt(0), c2 = pt(2), p = pt(4);
          pb.cubic_to(c1, c2, p);
          last_ctrl = c2;
          cur = p;
          break;
        }
        case 'S': {
          Point c1 = (prev == 'C' || prev == 'S') ? Point{2 * cur.x - last_ctrl.x, 2 * cur.y - last_ctrl.y} : cur;
          Point c2 = pt(0), p = pt(2);
          pb.cubic_to(c1, c2, p);
          last_ctrl = c2;
          cur = p;
          break;
        }
        case 'Q': {
          Point q = pt(0), p = pt(2);
          pb.quad_to(q, p);
          last_ctrl = q;
          cur = p;
          break;
        }
        case 'T': {
          Point q = (prev == 'Q' || prev == 'T') ? Point{2 * cur.x - last_ctrl.x, 2 * cur.y - last_ctrl.y} : cur;
          Point p = pt(0);
          pb.quad_to(q, p);
          last_ctrl = q;
          cur = p;
          break;
        }
        case 'A': {
          Point p = pt(5);
          pb.arc_to(a[0], a[1], a[2], a[3] != 0, a[4] != 0, p);
          cur = p;
          break;
        }
        case 'Z':
          pb.close();
          cur = start;
          break;
        default:
          break;
      }
      prev = op;
    }
  }

  std::string svg_text_content(NodeHandle h) const {
    const Node& n = s_.node(h);
    std::string out = n.text.value_or("");
    for (NodeHandle c : n.children) out += svg_text_content(c);
    return out;
  }

  void draw_svg(NodeHandle h, const Affine& parent, const SvgStyle& inherited, const Box& clip) {
    const Node& n = s_.node(h);
    if (n.tag == kTextTag) return;
    std::size_t idx = open_box(h);
    std::size_t first = items.size();
    SvgStyle st = resolve_svg_style(n, inherited);
    Affine m = parent;
    if (const auto* t = n.attrs.find("transform")) {
      if (auto tm = parse_transform(*t)) m = m.then_after(*tm);
    }
    auto num = [&](std::string_view name, double dflt = 0) { return number_attr(n, name).value_or(dflt); };
    const std::string& tag = n.tag;
    Box own;
    if (tag == "g") {
      for (NodeHandle c : n.children) draw_svg(c, m, st, clip);
    } else if (tag == "svg") {
      Viewport vp = svg_viewport(n, m, num("x"), num("y"), 300);
      Box view = raster::item_bounds(FillItem{{rounded_rect(0, 0, vp.w, vp.h, 0, 0, m.then_after(Affine::translate(num("x"), num("y"))))}, false, {}, {}});
      Box inner = clip.intersected(view);
      for (NodeHandle c : n.children) draw_svg(c, vp.m, st, inner);
      own = view.intersected(clip);
    } else if (tag == "rect") {
      double w = num("width"), hh = num("height");
      if (w > 0 && hh > 0) {
        auto rx = number_attr(n, "rx"), ry = number_attr(n, "ry");
        if (rx && *rx < 0) rx.reset();
        if (ry && *ry < 0) ry.reset();
        double rxv = rx ? *rx : ry ? *ry : 0;
        double ryv = ry ? *ry : rxv;
        rxv = std::min(rxv, w / 2);
        ryv = std::min(ryv, hh / 2);
        paint({Subpath{rounded_rect(num("x"), num("y"), w, hh, rxv, ryv, m), true}}, st, m, clip, true);
      }
    } else if (tag == "circle" || tag == "ellipse") {
      double rx = tag == "circle" ? num("r") : num("rx");
      double ry = tag == "circle" ? rx : num("ry");
      if (rx > 0 && ry > 0) {
        PathBuilder pb(m);
        ellipse_path(pb, num("cx"), num("cy"), rx, ry);
        paint(pb.finish(), st, m, clip, true);
      }
    } else if (tag == "line") {
      PathBuilder pb(m);
      pb.move_to({num("x1"), num("y1")});
      pb.line_to({num("x2"), num("y2")});
      paint(pb.finish(), st, m, clip, false);
    } else if (tag == "polyline" || tag == "polygon") {
      if (const auto* pts = n.attrs.find("points")) {
        if (auto list = parse_point_list(*pts)) {
          PathBuilder pb(m);
          pb.move_to(list->front());
          for (std::size_t i = 1; i < list->size(); ++i) pb.line_to((*list)[i]);
          if (tag == "polygon") pb.close();
          paint(pb.finish(), st, m, clip, true);
        }
      }
    } else if (tag == "path") {
      if (const auto* d = n.attrs.find("d")) {
        if (auto cmds = parse_path_data(*d)) {
          PathBuilder pb(m);
          trace_path(pb, *cmds);
          paint(pb.finish(), st, m, clip, true);
        }
      }
    } else if (tag == "text") {
      std::string content = collapse(svg_text_content(h), true);
      if (!content.empty() && st.fill.a > 0) {
        Point anchor = m.apply({num("x"), num("y")});
        double size = st.font_size * m.scale_factor();
        double w = raster::kAdvanceRatio * size * static_cast<double>(raster::glyph_count(content));
        if (st.anchor == "middle") anchor.x -= w / 2;
        if (st.anchor == "end") anchor.x -= w;
        Rgba color = st.fill;
        color.a = scaled_alpha(st.fill.a, st.opacity * st.fill_opacity);
        if (color.a > 0 && size > 0) items.push_back(TextItem{content, anchor.x, anchor.y, size, st.bold, color, clip});
      }
    }
    // HTML elements nested in SVG are not drawn.
    if (idx != kNoBox) {
      Box b = bounds_of(items, first);
      if (tag == "svg") b = own;
      close_box(idx, b);
    }
  }

  const DomState& s_;
  const RenderOptions& opt_;
};

Result<int, RenderError> canvas_height(double content, const RenderOptions& options) {
  double h = std::max<double>(options.min_height, std::ceil(content));
  if (h > options.max_height) {
    return RenderError{RenderErrorKind::CanvasOverflow, "layout height " + std::to_string(static_cast<long long>(h)) +
                                                            " px exceeds the maximum of " +
                                                            std::to_string(options.max_height) + " px"};
  }
  return static_cast<int>(h);
}

}  // namespace

bool renderer_supports(std::string_view tag) { return tag == kTextTag || is_supported_tag(tag); }

Result<RenderResult, RenderError> render(const DomState& state, const RenderOptions& options) {
  Layout layout(state, options);
  double content = layout.run();
  auto height = canvas_height(content, options);
  if (!height) return height.error();
  int width = static_cast<int>(std::ceil(options.canvas_width));
  RenderResult out;
  out.image = raster::rasterize(layout.items, width, height.value(), options.supersample, options.background);
  out.boxes = std::move(layout.boxes);
  return out;
}

Result<int, RenderError> measure_height(const DomState& state, const RenderOptions& options) {
  Layout layout(state, options);
  return canvas_height(layout.run(), options);
}

}  // namespace canvascot
