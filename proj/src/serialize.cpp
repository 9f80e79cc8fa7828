#include <string>

#include "canvascot/dom.hpp"

namespace canvascot {
namespace {

constexpr std::string_view kPrologue =
    "<!DOCTYPE html>\n"
    "<html id=\"document\">\n"
    "<head>\n"
    "<meta charset=\"utf-8\">\n"
    "</head>\n"
    "<body id=\"root\">\n";
constexpr std::string_view kEpilogue =
    "</body>\n"
    "</html>\n";

void escape_text(std::string_view s, std::string& out) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
}

void escape_attr(std::string_view s, std::string& out) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
}

// Adapters so one writer serves both value trees and arena subtrees.
struct ValueView {
  const DomNode* n;
  const std::string& tag() const { return n->tag; }
  const AttrList& attrs() const { return n->attrs; }
  const std::optional<std::string>& text() const { return n->text; }
  std::size_t child_count() const { return n->children.size(); }
  ValueView child(std::size_t i) const { return {&n->children[i]}; }
};

struct ArenaView {
  const DomState* s;
  NodeHandle h;
  const DomState::Node& node() const { return s->node(h); }
  const std::string& tag() const { return node().tag; }
  const AttrList& attrs() const { return node().attrs; }
  const std::optional<std::string>& text() const { return node().text; }
  std::size_t child_count() const { return node().children.size(); }
  ArenaView child(std::size_t i) const { return {s, node().children[i]}; }
};

template <class View>
void write_inline(const View& v, std::string& out) {
  if (v.tag() == kTextTag) {
    escape_text(v.text().value_or(""), out);
    return;
  }
  out += '<';
  out += v.tag();
  for (const auto& [name, value] : v.attrs()) {
    out += ' ';
    out += name;
    out += "=\"";
    escape_attr(value, out);
    out += '"';
  }
  if (!v.text() && v.child_count() == 0) {
    out += "/>";
    return;
  }
  out += '>';
  if (v.text()) escape_text(*v.text(), out);
  for (std::size_t i = 0; i < v.child_count(); ++i) write_inline(v.child(i), out);
  out += "</";
  out += v.tag();
  out += '>';
}

template <class View>
bool has_text_runs(const View& v) {
  for (std::size_t i = 0; i < v.child_count(); ++i) {
    if (v.child(i).tag() == kTextTag) return true;
  }
  return false;
}

template <class View>
void write_block(const View& v, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  if (v.child_count() == 0 || has_text_runs(v)) {
    write_inline(v, out);
    out += '\n';
    return;
  }
  out += '<';
  out += v.tag();
  for (const auto& [name, value] : v.attrs()) {
    out += ' ';
    out += name;
    out += "=\"";
    escape_attr(value, out);
    out += '"';
  }
  out += ">\n";
  for (std::size_t i = 0; i < v.child_count(); ++i) write_block(v.child(i), depth + 1, out);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "</";
  out += v.tag();
  out += ">\n";
}

}  // namespace

std::string serialize_node(const DomNode& node) {
  std::string out;
  write_block(ValueView{&node}, 0, out);
  return out;
}

std::string serialize_subtree(const DomState& state, NodeHandle h) {
  std::string out;
  write_block(ArenaView{&state, h}, 0, out);
  return out;
}

std::string serialize_body(const DomState& state) {
  std::string out;
  ArenaView body{&state, state.body()};
  for (std::size_t i = 0; i < body.child_count(); ++i) write_block(body.child(i), 1, out);
  return out;
}

std::string serialize(const DomState& state) {
  std::string out(kPrologue);
  out += serialize_body(state);
  out += kEpilogue;
  return out;
}

Result<DomState, ParseDiagnostic> parse_document(std::string_view text, StateOptions options) {
  if (text.substr(0, kPrologue.size()) != kPrologue) {
    return ParseDiagnostic{DiagnosticKind::MalformedMarkup, 0, "", "document does not start with the notebook boilerplate"};
  }
  if (text.size() < kPrologue.size() + kEpilogue.size() ||
      text.substr(text.size() - kEpilogue.size()) != kEpilogue) {
    return ParseDiagnostic{DiagnosticKind::MalformedMarkup, text.size(), "",
                           "document does not end with the notebook boilerplate"};
  }
  std::string_view body = text.substr(kPrologue.size(), text.size() - kPrologue.size() - kEpilogue.size());
  DomState state(options);
  if (!is_whitespace_only(body)) {
    if (auto err = apply_in_place(state, InsertAction{std::string(body), std::nullopt, std::nullopt})) {
      ParseDiagnostic diag = err->diagnostic.value_or(
          ParseDiagnostic{DiagnosticKind::MalformedMarkup, 0, "", err->message});
      diag.offset += kPrologue.size();
      return diag;
    }
  }
  // A parsed document is a snapshot, not a history.
  state.revision_ = 0;
  return state;
}

}  // namespace canvascot
