#pragma once

// Seeded generator of actions that the notebook should accept. It reads the
// current tree from the oracle so it never consults the code under test.
// Text only goes into leaf elements, so mixed content never arises.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "canvascot/dom.hpp"
#include "oracle.hpp"

namespace gen {

enum class Kind { Container, TextLeaf, EmptyLeaf };

inline Kind kind_of(const std::string& tag) {
  if (tag == "div" || tag == "svg" || tag == "g" || tag == "ul") return Kind::Container;
  if (tag == "span" || tag == "strong" || tag == "li" || tag == "text") return Kind::TextLeaf;
  return Kind::EmptyLeaf;
}

inline bool svg_context(const std::string& tag) { return tag == "svg" || tag == "g"; }

struct Located {
  const oracle::Node* node;
  const oracle::Node* parent;  // null for body children
};

inline void flatten(const std::vector<oracle::Node>& nodes, const oracle::Node* parent, std::vector<Located>& out) {
  for (const auto& n : nodes) {
    out.push_back({&n, parent});
    flatten(n.kids, &n, out);
  }
}

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(uniform(0, int(v.size()) - 1))]; }

  std::string fresh_id() { return "n" + std::to_string(next_id_++); }

  std::string words() {
    static const std::vector<std::string> w = {"alpha", "beta", "a&b", "x<y", "cost", "$82.65", "\"q\"", "bar", "note", "7"};
    std::string out = pick(w);
    for (int k = uniform(0, 3); k > 0; --k) out += " " + pick(w);
    return out;
  }

  std::string escape_text(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '&') out += "&amp;";
      else if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else out += c;
    }
    return out;
  }

  std::string number(int lo, int hi) { return std::to_string(uniform(lo, hi)); }

  // Markup for one element of the given tag, with fresh ids throughout.
  std::string element(const std::string& tag, int depth, std::optional<std::string> id = std::nullopt) {
    std::string q = chance(0.2) ? "'" : "\"";
    auto attr = [&](const std::string& k, const std::string& v) { return " " + k + "=" + q + v + q; };
    std::string out = "<" + tag + attr("id", id ? *id : fresh_id());
    if (tag == "rect") out += attr("x", number(0, 300)) + attr("y", number(0, 300)) + attr("width", number(1, 200)) + attr("height", number(1, 200));
    if (tag == "circle") out += attr("cx", number(0, 300)) + attr("cy", number(0, 300)) + attr("r", number(1, 80));
    if (tag == "svg") out += attr("width", number(50, 500)) + attr("height", number(20, 300));
    if (tag == "text") out += attr("x", number(0, 300)) + attr("y", number(10, 300));
    if (chance(0.3)) out += attr("fill", pick(std::vector<std::string>{"#a629a6", "red", "#1377EB", "none"}));
    if (chance(0.15) && q == "\"") out += attr("data-note", "a &amp; b &lt;c&gt; &quot;d&quot;");
    Kind k = kind_of(tag);
    if (k == Kind::EmptyLeaf) return out + (chance(0.5) ? "/>" : "></" + tag + ">");
    out += ">";
    if (k == Kind::TextLeaf) return out + escape_text(words()) + "</" + tag + ">";
    int n = depth >= 2 ? 0 : uniform(0, 3);
    for (int i = 0; i < n; ++i) {
      if (chance(0.3)) out += "\n  ";
      out += element(child_tag(tag), depth + 1);
    }
    return out + "</" + tag + ">";
  }

  std::string child_tag(const std::string& parent) {
    if (parent == "ul") return "li";
    if (svg_context(parent)) return pick(std::vector<std::string>{"rect", "circle", "text", "g"});
    return pick(std::vector<std::string>{"div", "span", "strong", "ul", "svg"});
  }

  // Tag for something mounted under `parent` (empty for the body).
  std::string fragment_for(const std::string& parent, int roots = 1) {
    std::string out;
    for (int i = 0; i < roots; ++i) {
      if (i) out += chance(0.5) ? "\n" : "";
      out += element(child_tag(parent.empty() ? "div" : parent), 0);
    }
    return out;
  }

  canvascot::Action next(const std::vector<oracle::Node>& body) {
    std::vector<Located> all;
    flatten(body, nullptr, all);
    std::size_t n = all.size();

    if (n == 0 || chance(n > 80 ? 0.05 : 0.35)) return insert(all, body);
    if (chance(0.003)) return canvascot::ClearAction{};
    int r = uniform(0, 99);
    if (r < (n > 80 ? 45 : 20)) return canvascot::DeleteAction{pick(all).node->id()};
    if (r < 50) return modify(pick(all));
    if (r < 70) return replace(pick(all));
    return insert(all, body);
  }

  canvascot::Action insert(const std::vector<Located>& all, const std::vector<oracle::Node>& body) {
    std::vector<const oracle::Node*> containers;
    for (const auto& l : all)
      if (kind_of(l.node->tag) == Kind::Container) containers.push_back(l.node);
    const oracle::Node* parent = containers.empty() || chance(0.3) ? nullptr : pick(containers);
    const std::vector<oracle::Node>& kids = parent ? parent->kids : body;
    canvascot::InsertAction a;
    a.fragment = fragment_for(parent ? parent->tag : "", chance(0.2) ? 2 : 1);
    if (parent) a.root_id = parent->id();
    else if (chance(0.5)) a.root_id = "root";
    if (!kids.empty() && chance(0.4)) a.before_id = kids[static_cast<std::size_t>(uniform(0, int(kids.size()) - 1))].id();
    return a;
  }

  canvascot::Action modify(const Located& l) {
    canvascot::ModifyAction a;
    a.target_id = l.node->id();
    Kind k = kind_of(l.node->tag);
    if (k == Kind::TextLeaf && chance(0.5)) {
      a.attrs.emplace_back("#text", chance(0.9) ? std::optional<std::string>(words()) : std::nullopt);
    }
    int extra = uniform(k == Kind::TextLeaf && !a.attrs.empty() ? 0 : 1, 2);
    for (int i = 0; i < extra; ++i) {
      int r = uniform(0, 4);
      if (r == 0) a.attrs.emplace_back("fill", pick(std::vector<std::string>{"#009E5F", "blue", "#eee"}));
      else if (r == 1) a.attrs.emplace_back("data-k", words());
      else if (r == 2) a.attrs.emplace_back("fill", std::nullopt);
      else if (r == 3) a.attrs.emplace_back("x", number(0, 400));
      else a.attrs.emplace_back("width", number(1, 500));
    }
    return a;
  }

  canvascot::Action replace(const Located& l) {
    canvascot::ReplaceAction a;
    a.target_id = l.node->id();
    std::string parent_tag = l.parent ? l.parent->tag : "div";
    std::string tag = child_tag(parent_tag);
    // Sometimes keep the target's own id, which is exempt from collision.
    a.fragment = element(tag, 0, chance(0.4) ? std::optional<std::string>(a.target_id) : std::nullopt);
    return a;
  }

 private:
  std::mt19937_64 rng_;
  int next_id_ = 0;
};

/// Applies a library action to the oracle. False when the oracle rejects it.
inline bool apply_to_oracle(oracle::Document& doc, const canvascot::Action& action) {
  using namespace canvascot;
  if (auto* a = std::get_if<InsertAction>(&action)) return doc.insert(a->fragment, a->root_id.value_or("root"), a->before_id);
  if (auto* a = std::get_if<ModifyAction>(&action)) return doc.modify(a->target_id, a->attrs);
  if (auto* a = std::get_if<ReplaceAction>(&action)) return doc.replace(a->target_id, a->fragment);
  if (auto* a = std::get_if<DeleteAction>(&action)) return doc.remove(a->target_id);
  doc.clear();
  return true;
}

}  // namespace gen
