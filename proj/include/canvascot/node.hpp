#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace canvascot {

/// Reserved id of the body container every episode writes into.
inline constexpr std::string_view kRootId = "root";
/// Reserved id of the document element that owns the body.
inline constexpr std::string_view kDocumentId = "document";
/// Tag used for character-data runs inside mixed content.
inline constexpr std::string_view kTextTag = "#text";
/// Pseudo-attribute that addresses a node's character data in a Modify.
inline constexpr std::string_view kTextPseudoAttr = "#text";

/// True for a usable node id: non-empty, no whitespace, no angle brackets,
/// no quotes.
bool is_valid_node_id(std::string_view id);

/// True for a reserved id that Modify/Replace/Delete may not target.
inline bool is_reserved_id(std::string_view id) { return id == kRootId || id == kDocumentId; }

/// Ordered attribute list. Names are unique; order is insertion order.
class AttrList {
 public:
  using Entry = std::pair<std::string, std::string>;

  const std::string* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  /// Overwrites in place when present, appends otherwise.
  void set(std::string_view name, std::string value);
  bool erase(std::string_view name);

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool operator==(const AttrList&) const = default;

 private:
  std::vector<Entry> entries_;
};

/// Value-semantic element tree. Used for parsed fragments and for
/// materialized subtrees of a DomState.
///
/// An element holds either `text` (pure character data, no child
/// elements) or `children`. Mixed content is represented with children
/// tagged kTextTag whose `text` carries the run.
struct DomNode {
  std::string tag;
  AttrList attrs;
  std::optional<std::string> text;
  std::vector<DomNode> children;

  std::optional<std::string_view> id() const {
    if (const auto* v = attrs.find("id")) return std::string_view(*v);
    return std::nullopt;
  }
  bool is_text() const { return tag == kTextTag; }

  bool operator==(const DomNode&) const = default;
};

bool is_whitespace_only(std::string_view s);

}  // namespace canvascot
