#include "canvascot/fragment.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "canvascot/dom.hpp"
#include "canvascot/geometry.hpp"

namespace canvascot {
namespace {

constexpr std::size_t kMaxDepth = 256;

constexpr std::array<std::string_view, 18> kSupportedTags = {
    "div", "span", "strong", "ul", "li", "table", "tr", "td", "text",
    "svg", "g", "rect", "circle", "ellipse", "line", "polyline", "polygon", "path"};

constexpr std::array<std::string_view, 15> kGeometryAttrs = {
    "x", "y", "cx", "cy", "r", "rx", "ry", "width", "height", "x1", "y1", "x2", "y2", "stroke-width", "font-size"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_name_char(char c) {
  return is_alpha(c) || (c >= '0' && c <= '9') || c == '_' || c == ':' || c == '.' || c == '-';
}

// Offset of the first byte that breaks UTF-8 well-formedness, or npos.
std::size_t first_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      len = 2, cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3, cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4, cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3f);
    }
    bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return i;
    i += len;
  }
  return std::string_view::npos;
}

void decode_entities(std::string_view raw, std::string& out) {
  static constexpr std::array<std::pair<std::string_view, char>, 5> kEntities = {
      {{"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}}};
  for (std::size_t i = 0; i < raw.size();) {
    if (raw[i] == '&') {
      bool matched = false;
      for (const auto& [name, ch] : kEntities) {
        if (raw.substr(i, name.size()) == name) {
          out.push_back(ch);
          i += name.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    out.push_back(raw[i++]);
  }
}

struct ContentItem {
  bool is_text = false;
  std::string text;
  DomNode element;
};

class Parser {
 public:
  Parser(std::string_view text, std::size_t base, bool require_top_ids)
      : s_(text), base_(base), require_top_ids_(require_top_ids) {}

  Result<std::vector<DomNode>, ParseDiagnostic> run(std::vector<std::size_t>* offsets,
                                                    std::vector<std::string>* ids_in_order) {
    offsets_ = offsets;
    ids_in_order_ = ids_in_order;
    std::vector<DomNode> roots;
    bool ok = parse_top(roots);
    std::size_t bad = first_invalid_utf8(s_);
    if (bad != std::string_view::npos && (ok || error_->offset >= base_ + bad)) {
      return ParseDiagnostic{DiagnosticKind::MalformedMarkup, base_ + bad, "", "invalid UTF-8 byte sequence"};
    }
    if (!ok) return *error_;
    return roots;
  }

 private:
  bool fail(DiagnosticKind kind, std::size_t at, std::string message) {
    if (!error_) error_ = ParseDiagnostic{kind, base_ + at, current_path(), std::move(message)};
    return false;
  }

  std::string current_path() const {
    std::string out;
    for (const auto& p : path_) {
      if (!out.empty()) out += '/';
      out += p;
    }
    return out;
  }

  bool starts_with(std::string_view prefix) const { return s_.substr(pos_, prefix.size()) == prefix; }

  bool skip_comment() {
    std::size_t start = pos_;
    std::size_t end = s_.find("-->", pos_ + 4);
    if (end == std::string_view::npos) return fail(DiagnosticKind::MalformedMarkup, start, "unterminated comment");
    pos_ = end + 3;
    return true;
  }

  bool parse_top(std::vector<DomNode>& roots) {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (is_space(c)) {
        ++pos_;
        continue;
      }
      if (c != '<') return fail(DiagnosticKind::MalformedMarkup, pos_, "text outside of an element");
      if (starts_with("<!--")) {
        if (!skip_comment()) return false;
        continue;
      }
      if (starts_with("</")) return fail(DiagnosticKind::MalformedMarkup, pos_, "unexpected closing tag");
      DomNode node;
      if (!parse_element(node, /*top=*/true, 1)) return false;
      roots.push_back(std::move(node));
    }
    return true;
  }

  bool parse_element(DomNode& out, bool top, std::size_t depth) {
    std::size_t start = pos_;
    if (depth > kMaxDepth) return fail(DiagnosticKind::MalformedMarkup, start, "elements nested too deeply");
    ++pos_;  // '<'
    if (pos_ >= s_.size()) return fail(DiagnosticKind::MalformedMarkup, start, "unterminated start tag");
    if (s_[pos_] == '!' || s_[pos_] == '?') {
      return fail(DiagnosticKind::MalformedMarkup, start, "declarations and processing instructions are not allowed");
    }
    std::size_t name_start = pos_;
    if (!is_alpha(s_[pos_])) return fail(DiagnosticKind::MalformedMarkup, start, "stray '<'");
    while (pos_ < s_.size() && is_name_char(s_[pos_])) ++pos_;
    out.tag = std::string(s_.substr(name_start, pos_ - name_start));
    path_.push_back(out.tag);
    if (!is_supported_tag(out.tag)) {
      return fail(DiagnosticKind::UnsupportedTag, start, "unsupported element <" + out.tag + ">");
    }
    if (offsets_) offsets_->push_back(base_ + start);

    bool self_closing = false;
    while (true) {
      std::size_t before_ws = pos_;
      while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
      if (pos_ >= s_.size()) return fail(DiagnosticKind::MalformedMarkup, start, "unterminated start tag");
      if (s_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (starts_with("/>")) {
        pos_ += 2;
        self_closing = true;
        break;
      }
      if (pos_ == before_ws && !out.attrs.empty()) {
        return fail(DiagnosticKind::MalformedMarkup, pos_, "attributes must be separated by whitespace");
      }
      if (!parse_attribute(out)) return false;
    }

    if (auto id = out.id()) path_.back() = out.tag + "#" + std::string(*id);
    if (top && require_top_ids_ && !out.id()) {
      return fail(DiagnosticKind::MissingRequiredAttribute, start, "top-level <" + out.tag + "> needs an id attribute");
    }
    if (out.tag == "path" && !out.attrs.contains("d")) {
      return fail(DiagnosticKind::MissingRequiredAttribute, start, "<path> needs a d attribute");
    }
    if ((out.tag == "polyline" || out.tag == "polygon") && !out.attrs.contains("points")) {
      return fail(DiagnosticKind::MissingRequiredAttribute, start, "<" + out.tag + "> needs a points attribute");
    }

    if (!self_closing && !parse_content(out, start, depth)) return false;
    path_.pop_back();
    return true;
  }

  bool parse_attribute(DomNode& out) {
    std::size_t start = pos_;
    if (!is_alpha(s_[pos_]) && s_[pos_] != '_' && s_[pos_] != ':') {
      return fail(DiagnosticKind::MalformedMarkup, pos_, "unexpected character in start tag");
    }
    while (pos_ < s_.size() && is_name_char(s_[pos_])) ++pos_;
    std::string name(s_.substr(start, pos_ - start));
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
    if (pos_ >= s_.size() || s_[pos_] != '=') {
      return fail(DiagnosticKind::MalformedMarkup, start, "attribute '" + name + "' has no value");
    }
    ++pos_;
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
    if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) {
      return fail(DiagnosticKind::MalformedMarkup, start, "attribute '" + name + "' value must be quoted");
    }
    char quote = s_[pos_++];
    std::size_t close = s_.find(quote, pos_);
    if (close == std::string_view::npos) {
      return fail(DiagnosticKind::MalformedMarkup, start, "unterminated value for attribute '" + name + "'");
    }
    std::string value;
    decode_entities(s_.substr(pos_, close - pos_), value);
    pos_ = close + 1;

    if (out.attrs.contains(name)) {
      return fail(DiagnosticKind::MalformedMarkup, start, "duplicate attribute '" + name + "'");
    }
    if (auto problem = check_attribute_value(name, value)) {
      return fail(DiagnosticKind::MalformedMarkup, start, *problem);
    }
    if (name == "id") {
      if (!ids_.insert(value).second) {
        return fail(DiagnosticKind::DuplicateIdInFragment, start, "id '" + value + "' appears more than once");
      }
      if (ids_in_order_) ids_in_order_->push_back(value);
    }
    out.attrs.set(name, std::move(value));
    return true;
  }

  bool parse_content(DomNode& out, std::size_t element_start, std::size_t depth) {
    std::vector<ContentItem> items;
    auto append_text = [&](std::string_view raw) {
      if (raw.empty()) return;
      if (items.empty() || !items.back().is_text) items.push_back(ContentItem{true, {}, {}});
      decode_entities(raw, items.back().text);
    };

    while (true) {
      std::size_t lt = s_.find('<', pos_);
      if (lt == std::string_view::npos) {
        return fail(DiagnosticKind::MalformedMarkup, element_start, "unclosed element <" + out.tag + ">");
      }
      append_text(s_.substr(pos_, lt - pos_));
      pos_ = lt;
      if (starts_with("<!--")) {
        if (!skip_comment()) return false;
        continue;
      }
      if (starts_with("</")) {
        std::size_t close_start = pos_;
        pos_ += 2;
        std::size_t name_start = pos_;
        while (pos_ < s_.size() && is_name_char(s_[pos_])) ++pos_;
        std::string_view name = s_.substr(name_start, pos_ - name_start);
        while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
        if (pos_ >= s_.size() || s_[pos_] != '>') {
          return fail(DiagnosticKind::MalformedMarkup, close_start, "malformed closing tag");
        }
        if (name != out.tag) {
          return fail(DiagnosticKind::MalformedMarkup, close_start,
                      "mismatched closing tag </" + std::string(name) + ">, expected </" + out.tag + ">");
        }
        ++pos_;
        break;
      }
      ContentItem item;
      if (!parse_element(item.element, /*top=*/false, depth + 1)) return false;
      items.push_back(std::move(item));
    }

    bool has_real_text = std::any_of(items.begin(), items.end(),
                                     [](const ContentItem& i) { return i.is_text && !is_whitespace_only(i.text); });
    bool has_elements = std::any_of(items.begin(), items.end(), [](const ContentItem& i) { return !i.is_text; });
    if (!has_elements) {
      if (has_real_text) out.text = std::move(items.front().text);
      return true;
    }
    for (auto& item : items) {
      if (item.is_text) {
        if (!has_real_text) continue;
        DomNode run;
        run.tag = std::string(kTextTag);
        run.text = std::move(item.text);
        out.children.push_back(std::move(run));
      } else {
        out.children.push_back(std::move(item.element));
      }
    }
    return true;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t base_ = 0;
  bool require_top_ids_ = true;
  std::vector<std::string> path_;
  std::unordered_set<std::string> ids_;
  std::optional<ParseDiagnostic> error_;
  std::vector<std::size_t>* offsets_ = nullptr;
  std::vector<std::string>* ids_in_order_ = nullptr;
};

// Preorder walk over elements, tracking the element path and the offset
// index used for diagnostics.
template <class Fn>
bool walk_elements(const DomNode& node, std::string& path, std::size_t& index, Fn&& fn) {
  if (node.is_text()) return true;
  std::size_t saved = path.size();
  if (!path.empty()) path += '/';
  path += node.tag;
  if (auto id = node.id()) {
    path += '#';
    path += *id;
  }
  std::size_t my_index = index++;
  if (!fn(node, path, my_index)) return false;
  for (const auto& child : node.children) {
    if (!walk_elements(child, path, index, fn)) return false;
  }
  path.resize(saved);
  return true;
}

}  // namespace

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::MalformedMarkup: return "MalformedMarkup";
    case DiagnosticKind::UnsupportedTag: return "UnsupportedTag";
    case DiagnosticKind::MissingRequiredAttribute: return "MissingRequiredAttribute";
    case DiagnosticKind::DuplicateIdInFragment: return "DuplicateIdInFragment";
    case DiagnosticKind::OversizeDimension: return "OversizeDimension";
  }
  return "Unknown";
}

std::string ParseDiagnostic::describe() const {
  std::string out(to_string(kind));
  out += " at byte " + std::to_string(offset);
  if (!path.empty()) out += " (" + path + ")";
  out += ": " + message;
  return out;
}

const std::vector<std::string_view>& supported_tags() {
  static const std::vector<std::string_view> tags(kSupportedTags.begin(), kSupportedTags.end());
  return tags;
}

bool is_supported_tag(std::string_view tag) {
  return std::find(kSupportedTags.begin(), kSupportedTags.end(), tag) != kSupportedTags.end();
}

bool is_geometry_attribute(std::string_view name) {
  return std::find(kGeometryAttrs.begin(), kGeometryAttrs.end(), name) != kGeometryAttrs.end();
}

bool is_valid_attribute_name(std::string_view name) {
  if (name.empty()) return false;
  if (!is_alpha(name[0]) && name[0] != '_' && name[0] != ':') return false;
  return std::all_of(name.begin(), name.end(), is_name_char);
}

std::optional<std::string> check_attribute_value(std::string_view name, std::string_view value) {
  auto quoted = [&] { return "attribute '" + std::string(name) + "'"; };
  if (name == "id") {
    if (!is_valid_node_id(value)) return "invalid id '" + std::string(value) + "'";
  } else if (is_geometry_attribute(name)) {
    if (!parse_decimal(value)) return quoted() + " must be a finite decimal number, got '" + std::string(value) + "'";
  } else if (name == "d") {
    if (!parse_path_data(value)) return quoted() + " is not valid path data";
  } else if (name == "points") {
    if (!parse_point_list(value)) return quoted() + " is not a valid point list";
  } else if (name == "viewBox") {
    auto nums = parse_number_list(value);
    if (!nums || nums->size() != 4) return quoted() + " must hold four numbers";
  } else if (name == "transform") {
    if (!parse_transform(value)) return quoted() + " is not a valid transform list";
  }
  return std::nullopt;
}

Result<Fragment, ParseDiagnostic> parse_fragment(std::string_view text) {
  Fragment fragment;
  Parser parser(text, 0, /*require_top_ids=*/true);
  auto roots = parser.run(nullptr, &fragment.introduced_ids);
  if (!roots) return roots.error();
  if (roots->empty()) return ParseDiagnostic{DiagnosticKind::MalformedMarkup, 0, "", "fragment contains no element"};
  fragment.roots = std::move(roots.value());
  fragment.source_text = std::string(text);
  return fragment;
}

std::optional<ParseDiagnostic> validate_fragment(const Fragment& fragment,
                                                 const std::vector<std::string_view>& taken_ids,
                                                 const ValidationOptions& options) {
  std::unordered_set<std::string_view> taken(taken_ids.begin(), taken_ids.end());
  // Offsets are recovered by re-scanning the source; diagnostics from this
  // stage point at the element start.
  std::vector<std::size_t> offsets;
  if (!fragment.source_text.empty()) {
    Parser parser(fragment.source_text, 0, true);
    (void)parser.run(&offsets, nullptr);
  }
  std::optional<ParseDiagnostic> problem;
  std::size_t index = 0;
  for (const auto& root : fragment.roots) {
    std::string path;
    bool ok = walk_elements(root, path, index, [&](const DomNode& node, const std::string& p, std::size_t i) {
      std::size_t at = i < offsets.size() ? offsets[i] : 0;
      if (auto id = node.id(); id && taken.count(*id)) {
        problem = ParseDiagnostic{DiagnosticKind::DuplicateIdInFragment, at, p,
                                  "id '" + std::string(*id) + "' already exists in the notebook"};
        return false;
      }
      for (const auto& [name, value] : node.attrs) {
        if (auto bad = check_attribute_value(name, value)) {
          problem = ParseDiagnostic{DiagnosticKind::MalformedMarkup, at, p, *bad};
          return false;
        }
        if (name == "width") {
          double w = *parse_decimal(value);
          if (w > options.canvas_width) {
            problem = ParseDiagnostic{DiagnosticKind::OversizeDimension, at, p,
                                      "width " + value + " exceeds the canvas width " +
                                          std::to_string(static_cast<long long>(options.canvas_width))};
            return false;
          }
        }
      }
      return true;
    });
    if (!ok) return problem;
  }
  return std::nullopt;
}

std::optional<ParseDiagnostic> validate_fragment(const Fragment& fragment, const DomState& state,
                                                 std::optional<std::string_view> replace_target) {
  std::vector<std::string_view> taken = state.ids();
  if (replace_target) {
    if (auto h = state.lookup(*replace_target)) {
      DomNode old = state.subtree(*h);
      std::unordered_set<std::string> exempt;
      std::string path;
      std::size_t index = 0;
      walk_elements(old, path, index, [&](const DomNode& n, const std::string&, std::size_t) {
        if (auto id = n.id()) exempt.insert(std::string(*id));
        return true;
      });
      std::erase_if(taken, [&](std::string_view id) { return exempt.count(std::string(id)) > 0; });
    }
  }
  return validate_fragment(fragment, taken, ValidationOptions{state.options().canvas_width});
}

}  // namespace canvascot
