#include "canvascot/dom.hpp"

#include <algorithm>

#include "canvascot/geometry.hpp"

namespace canvascot {

// ---------------------------------------------------------------------------
// Node basics

bool is_valid_node_id(std::string_view id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '<' || c == '>' || c == '"' ||
           c == '\'';
  });
}

bool is_whitespace_only(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; });
}

const std::string* AttrList::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.first == name) return &e.second;
  }
  return nullptr;
}

void AttrList::set(std::string_view name, std::string value) {
  for (auto& e : entries_) {
    if (e.first == name) {
      e.second = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::string(name), std::move(value));
}

bool AttrList::erase(std::string_view name) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.first == name; });
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

// ---------------------------------------------------------------------------
// Actions

std::string_view tool_name(const Action& action) {
  struct Visitor {
    std::string_view operator()(const InsertAction&) const { return "insert_element"; }
    std::string_view operator()(const ModifyAction&) const { return "modify_element"; }
    std::string_view operator()(const ReplaceAction&) const { return "replace_element"; }
    std::string_view operator()(const DeleteAction&) const { return "remove_element"; }
    std::string_view operator()(const ClearAction&) const { return "clear"; }
  };
  return std::visit(Visitor{}, action);
}

std::string_view to_string(ApplyErrorKind kind) {
  switch (kind) {
    case ApplyErrorKind::UnknownTarget: return "UnknownTarget";
    case ApplyErrorKind::InvalidFragment: return "InvalidFragment";
    case ApplyErrorKind::DuplicateId: return "DuplicateId";
    case ApplyErrorKind::InvalidAnchor: return "InvalidAnchor";
    case ApplyErrorKind::ReservedTarget: return "ReservedTarget";
  }
  return "Unknown";
}

std::string ApplyError::describe() const {
  std::string out(to_string(kind));
  out += ": ";
  out += diagnostic ? diagnostic->describe() : message;
  return out;
}

// ---------------------------------------------------------------------------
// DomState

DomState::DomState(StateOptions options) : options_(options) {
  document_ = allocate();
  nodes_[document_].tag = "html";
  nodes_[document_].attrs.set("id", std::string(kDocumentId));
  body_ = allocate();
  nodes_[body_].tag = "body";
  nodes_[body_].attrs.set("id", std::string(kRootId));
  nodes_[body_].parent = document_;
  nodes_[document_].children.push_back(body_);
  addr_.emplace(std::string(kDocumentId), document_);
  addr_.emplace(std::string(kRootId), body_);
}

std::optional<NodeHandle> DomState::lookup(std::string_view id) const {
  ++visits_;
  auto it = addr_.find(id);
  if (it == addr_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string_view> DomState::ids() const {
  std::vector<std::string_view> out;
  out.reserve(addr_.size());
  for (const auto& [id, h] : addr_) out.push_back(id);
  return out;
}

std::size_t DomState::user_node_count() const {
  std::size_t live = std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.live; });
  return live - 2;
}

DomNode DomState::subtree(NodeHandle h) const {
  const Node& n = nodes_.at(h);
  DomNode out{n.tag, n.attrs, n.text, {}};
  out.children.reserve(n.children.size());
  for (NodeHandle c : n.children) out.children.push_back(subtree(c));
  return out;
}

std::size_t DomState::sibling_index(NodeHandle h) const {
  const Node& n = nodes_.at(h);
  if (n.parent == kNoNode) return 0;
  const auto& sibs = nodes_[n.parent].children;
  return static_cast<std::size_t>(std::find(sibs.begin(), sibs.end(), h) - sibs.begin());
}

NodeHandle DomState::allocate() {
  NodeHandle h;
  if (!free_.empty()) {
    h = free_.back();
    free_.pop_back();
    nodes_[h] = Node{};
  } else {
    h = static_cast<NodeHandle>(nodes_.size());
    nodes_.emplace_back();
  }
  nodes_[h].live = true;
  return h;
}

NodeHandle DomState::mount(const DomNode& value, NodeHandle parent) {
  NodeHandle h = allocate();
  ++visits_;
  {
    Node& n = nodes_[h];
    n.tag = value.tag;
    n.attrs = value.attrs;
    n.text = value.text;
    n.parent = parent;
  }
  if (auto id = value.id()) addr_.emplace(std::string(*id), h);
  for (const auto& child : value.children) {
    NodeHandle c = mount(child, h);
    nodes_[h].children.push_back(c);
  }
  return h;
}

void DomState::release_subtree(NodeHandle h) {
  ++visits_;
  for (NodeHandle c : nodes_[h].children) release_subtree(c);
  if (auto id = nodes_[h].id()) addr_.erase(std::string(*id));
  nodes_[h] = Node{};
  free_.push_back(h);
}

void DomState::collect_ids(NodeHandle h, std::vector<std::string_view>& out) const {
  if (auto id = nodes_[h].id()) out.push_back(*id);
  for (NodeHandle c : nodes_[h].children) collect_ids(c, out);
}

// Restores the canonical content form the parser produces: either a single
// text leaf, element-only children, or mixed content with non-empty,
// non-adjacent text runs and at least one non-whitespace run.
void DomState::normalize_content(NodeHandle h) {
  ++visits_;
  auto is_run = [&](NodeHandle c) { return nodes_[c].tag == kTextTag; };

  if (nodes_[h].text && !nodes_[h].children.empty()) {
    NodeHandle run = allocate();
    nodes_[run].tag = std::string(kTextTag);
    nodes_[run].text = std::move(nodes_[h].text);
    nodes_[run].parent = h;
    nodes_[h].text.reset();
    nodes_[h].children.insert(nodes_[h].children.begin(), run);
  }

  std::vector<NodeHandle> merged;
  for (NodeHandle c : nodes_[h].children) {
    if (is_run(c) && !merged.empty() && is_run(merged.back())) {
      *nodes_[merged.back()].text += nodes_[c].text.value_or("");
      release_subtree(c);
    } else {
      merged.push_back(c);
    }
  }
  nodes_[h].children = std::move(merged);

  bool has_elements = false;
  bool has_real_text = false;
  for (NodeHandle c : nodes_[h].children) {
    if (is_run(c)) {
      has_real_text = has_real_text || !is_whitespace_only(nodes_[c].text.value_or(""));
    } else {
      has_elements = true;
    }
  }

  if (!has_elements) {
    std::string text = nodes_[h].text.value_or("");
    for (NodeHandle c : nodes_[h].children) {
      text += nodes_[c].text.value_or("");
      release_subtree(c);
    }
    nodes_[h].children.clear();
    if (is_whitespace_only(text)) {
      nodes_[h].text.reset();
    } else {
      nodes_[h].text = std::move(text);
    }
  } else if (!has_real_text) {
    std::vector<NodeHandle> kept;
    for (NodeHandle c : nodes_[h].children) {
      if (is_run(c)) {
        release_subtree(c);
      } else {
        kept.push_back(c);
      }
    }
    nodes_[h].children = std::move(kept);
  }
}

DomState new_state(StateOptions options) { return DomState(options); }

// ---------------------------------------------------------------------------
// Transition function

namespace {

ApplyError from_diagnostic(ParseDiagnostic diag) {
  ApplyErrorKind kind = diag.kind == DiagnosticKind::DuplicateIdInFragment ? ApplyErrorKind::DuplicateId
                                                                          : ApplyErrorKind::InvalidFragment;
  std::string message = diag.message;
  return ApplyError{kind, std::move(message), std::move(diag)};
}

ApplyError unknown(std::string_view id) {
  return ApplyError{ApplyErrorKind::UnknownTarget, "no element with id '" + std::string(id) + "'", std::nullopt};
}

ApplyError reserved(std::string_view id) {
  return ApplyError{ApplyErrorKind::ReservedTarget, "'" + std::string(id) + "' is reserved; use clear to reset",
                    std::nullopt};
}

ApplyError bad_modify(std::string path, std::string message, DiagnosticKind kind = DiagnosticKind::MalformedMarkup) {
  ParseDiagnostic diag{kind, 0, std::move(path), std::move(message)};
  return from_diagnostic(std::move(diag));
}

Result<Fragment, ApplyError> parse_for_state(const std::string& text, const DomState& state,
                                             std::optional<std::string_view> replace_target) {
  auto parsed = parse_fragment(text);
  if (!parsed) return from_diagnostic(parsed.error());
  if (auto problem = validate_fragment(parsed.value(), state, replace_target)) return from_diagnostic(*problem);
  return std::move(parsed).value();
}

}  // namespace

std::optional<ApplyError> apply_in_place(DomState& s, const Action& action) {
  if (const auto* a = std::get_if<InsertAction>(&action)) {
    std::string_view root_id = a->root_id ? std::string_view(*a->root_id) : kRootId;
    auto parent = s.lookup(root_id);
    if (!parent) return unknown(root_id);
    if (root_id == kDocumentId) return reserved(root_id);
    std::size_t position = s.nodes_[*parent].children.size();
    if (a->before_id) {
      auto anchor = s.lookup(*a->before_id);
      if (!anchor) return unknown(*a->before_id);
      if (s.nodes_[*anchor].parent != *parent) {
        return ApplyError{ApplyErrorKind::InvalidAnchor,
                          "'" + *a->before_id + "' is not a child of '" + std::string(root_id) + "'", std::nullopt};
      }
      position = s.sibling_index(*anchor);
    }
    auto fragment = parse_for_state(a->fragment, s, std::nullopt);
    if (!fragment) return fragment.error();

    std::vector<NodeHandle> mounted;
    for (const auto& root : fragment->roots) mounted.push_back(s.mount(root, *parent));
    auto& kids = s.nodes_[*parent].children;
    kids.insert(kids.begin() + static_cast<std::ptrdiff_t>(position), mounted.begin(), mounted.end());
    // A text leaf gaining elements keeps its text as the leading run.
    s.normalize_content(*parent);
  } else if (const auto* a = std::get_if<ModifyAction>(&action)) {
    auto target = s.lookup(a->target_id);
    if (!target) return unknown(a->target_id);
    if (is_reserved_id(a->target_id)) return reserved(a->target_id);
    const auto& node = s.nodes_[*target];
    std::string path = node.tag + "#" + a->target_id;
    for (const auto& [name, value] : a->attrs) {
      if (name == kTextPseudoAttr) {
        bool has_elements = std::any_of(node.children.begin(), node.children.end(),
                                        [&](NodeHandle c) { return s.nodes_[c].tag != kTextTag; });
        if (has_elements) return bad_modify(path, "#text can only be set on an element without child elements");
        continue;
      }
      if (name == "id") return bad_modify(path, "the id of an element cannot be modified; use replace_element");
      if (!is_valid_attribute_name(name)) return bad_modify(path, "invalid attribute name '" + name + "'");
      if (!value) continue;
      if (auto problem = check_attribute_value(name, *value)) return bad_modify(path, *problem);
      if (name == "width" && *parse_decimal(*value) > s.options_.canvas_width) {
        return bad_modify(path, "width " + *value + " exceeds the canvas width", DiagnosticKind::OversizeDimension);
      }
    }
    auto& mut = s.nodes_[*target];
    for (const auto& [name, value] : a->attrs) {
      if (name == kTextPseudoAttr) {
        if (!value || is_whitespace_only(*value)) {
          mut.text.reset();
        } else {
          mut.text = *value;
        }
      } else if (value) {
        mut.attrs.set(name, *value);
      } else {
        mut.attrs.erase(name);
      }
    }
  } else if (const auto* a = std::get_if<ReplaceAction>(&action)) {
    auto target = s.lookup(a->target_id);
    if (!target) return unknown(a->target_id);
    if (is_reserved_id(a->target_id)) return reserved(a->target_id);
    auto fragment = parse_for_state(a->fragment, s, std::string_view(a->target_id));
    if (!fragment) return fragment.error();

    NodeHandle parent = s.nodes_[*target].parent;
    std::size_t position = s.sibling_index(*target);
    auto& before = s.nodes_[parent].children;
    before.erase(before.begin() + static_cast<std::ptrdiff_t>(position));
    s.release_subtree(*target);
    std::vector<NodeHandle> mounted;
    for (const auto& root : fragment->roots) mounted.push_back(s.mount(root, parent));
    auto& kids = s.nodes_[parent].children;
    kids.insert(kids.begin() + static_cast<std::ptrdiff_t>(position), mounted.begin(), mounted.end());
    s.normalize_content(parent);
  } else if (const auto* a = std::get_if<DeleteAction>(&action)) {
    auto target = s.lookup(a->target_id);
    if (!target) return unknown(a->target_id);
    if (is_reserved_id(a->target_id)) return reserved(a->target_id);
    NodeHandle parent = s.nodes_[*target].parent;
    auto& kids = s.nodes_[parent].children;
    kids.erase(kids.begin() + static_cast<std::ptrdiff_t>(s.sibling_index(*target)));
    s.release_subtree(*target);
    s.normalize_content(parent);
  } else {
    std::vector<NodeHandle> kids = std::move(s.nodes_[s.body_].children);
    s.nodes_[s.body_].children.clear();
    s.nodes_[s.body_].text.reset();
    for (NodeHandle c : kids) s.release_subtree(c);
  }
  ++s.revision_;
  return std::nullopt;
}

Result<DomState, ApplyError> apply(const DomState& state, const Action& action) {
  DomState next = state;
  if (auto err = apply_in_place(next, action)) return *err;
  return next;
}

}  // namespace canvascot
