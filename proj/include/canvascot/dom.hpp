#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "canvascot/fragment.hpp"
#include "canvascot/node.hpp"
#include "canvascot/result.hpp"

namespace canvascot {

// ---------------------------------------------------------------------------
// Actions

struct InsertAction {
  std::string fragment;
  std::optional<std::string> root_id;    ///< absent mounts under kRootId
  std::optional<std::string> before_id;  ///< absent appends last
  bool operator==(const InsertAction&) const = default;
};

struct ModifyAction {
  std::string target_id;
  /// Applied in order. A null value removes the attribute; the name
  /// kTextPseudoAttr sets the node's character data.
  std::vector<std::pair<std::string, std::optional<std::string>>> attrs;
  bool operator==(const ModifyAction&) const = default;
};

struct ReplaceAction {
  std::string target_id;
  std::string fragment;
  bool operator==(const ReplaceAction&) const = default;
};

struct DeleteAction {
  std::string target_id;
  bool operator==(const DeleteAction&) const = default;
};

struct ClearAction {
  bool operator==(const ClearAction&) const = default;
};

using Action = std::variant<InsertAction, ModifyAction, ReplaceAction, DeleteAction, ClearAction>;

/// Tool name of an action: insert_element, modify_element, ...
std::string_view tool_name(const Action& action);

enum class ApplyErrorKind {
  UnknownTarget,
  InvalidFragment,
  DuplicateId,
  InvalidAnchor,
  ReservedTarget,
};

std::string_view to_string(ApplyErrorKind kind);

struct ApplyError {
  ApplyErrorKind kind;
  std::string message;
  std::optional<ParseDiagnostic> diagnostic;

  std::string describe() const;
};

// ---------------------------------------------------------------------------
// State

using NodeHandle = std::uint32_t;
inline constexpr NodeHandle kNoNode = 0xffffffffu;

struct StateOptions {
  double canvas_width = kDefaultCanvasWidth;
};

/// The reasoning substrate: a rooted element tree stored in a handle arena,
/// an id -> handle address map, and a revision counter.
///
/// Value-semantic. Copying takes a full snapshot.
class DomState {
 public:
  struct Node {
    std::string tag;
    AttrList attrs;
    std::optional<std::string> text;
    std::vector<NodeHandle> children;
    NodeHandle parent = kNoNode;
    bool live = false;

    std::optional<std::string_view> id() const {
      if (const auto* v = attrs.find("id")) return std::string_view(*v);
      return std::nullopt;
    }
  };

  explicit DomState(StateOptions options = {});

  /// Address-map lookup. Counts one visit.
  std::optional<NodeHandle> lookup(std::string_view id) const;

  const Node& node(NodeHandle h) const { return nodes_.at(h); }
  NodeHandle document() const { return document_; }
  NodeHandle body() const { return body_; }

  std::uint64_t revision() const { return revision_; }
  const StateOptions& options() const { return options_; }

  /// Ids currently registered in the address map (unordered).
  std::vector<std::string_view> ids() const;
  std::size_t id_count() const { return addr_.size(); }

  /// Number of live nodes under the body (excluding the body itself).
  std::size_t user_node_count() const;

  /// Materializes the subtree at `h` as a value tree.
  DomNode subtree(NodeHandle h) const;

  /// Index of `h` among its parent's children.
  std::size_t sibling_index(NodeHandle h) const;

  /// Counter of node touches performed by lookup/apply. Instrumentation only.
  std::uint64_t visits() const { return visits_; }
  void reset_visits() const { visits_ = 0; }

 private:
  friend std::optional<ApplyError> apply_in_place(DomState&, const Action&);
  friend Result<DomState, ParseDiagnostic> parse_document(std::string_view, StateOptions);

  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  NodeHandle allocate();
  NodeHandle mount(const DomNode& value, NodeHandle parent);
  void release_subtree(NodeHandle h);
  void collect_ids(NodeHandle h, std::vector<std::string_view>& out) const;
  void normalize_content(NodeHandle h);

  StateOptions options_;
  std::vector<Node> nodes_;
  std::vector<NodeHandle> free_;
  std::unordered_map<std::string, NodeHandle, StringHash, std::equal_to<>> addr_;
  NodeHandle document_ = kNoNode;
  NodeHandle body_ = kNoNode;
  std::uint64_t revision_ = 0;
  mutable std::uint64_t visits_ = 0;
};

/// Empty notebook: document + empty body, revision 0.
DomState new_state(StateOptions options = {});

/// Applies an action in place. On rejection the state is untouched and the
/// error is returned; on success the revision advances by one.
std::optional<ApplyError> apply_in_place(DomState& state, const Action& action);

/// Functional form: returns the successor state or the rejection.
Result<DomState, ApplyError> apply(const DomState& state, const Action& action);

// ---------------------------------------------------------------------------
// Canonical serialization

/// Full canonical document text (LF newlines, two-space indentation,
/// attributes in insertion order, double-quoted values).
std::string serialize(const DomState& state);

/// Canonical text of the body's children only (no boilerplate).
std::string serialize_body(const DomState& state);

/// Canonical text of one subtree.
std::string serialize_node(const DomNode& node);
std::string serialize_subtree(const DomState& state, NodeHandle h);

/// Inverse of serialize. Accepts exactly the canonical boilerplate around
/// an arbitrary body; the result has revision 0.
Result<DomState, ParseDiagnostic> parse_document(std::string_view text, StateOptions options = {});

}  // namespace canvascot
