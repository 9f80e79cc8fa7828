#include <algorithm>
#include <set>

#include "canvascot/dom.hpp"
#include "canvascot/protocol.hpp"
#include "corpus.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "random_actions.hpp"

using namespace canvascot;

namespace {

DomState with(const char* markup) {
  DomState s = new_state();
  REQUIRE_FALSE(apply_in_place(s, InsertAction{markup, std::nullopt, std::nullopt}));
  return s;
}

std::vector<std::string> body_ids(const DomState& s) {
  std::vector<std::string> out;
  for (NodeHandle h : s.node(s.body()).children)
    if (auto id = s.node(h).id()) out.emplace_back(*id);
  return out;
}

}  // namespace

TEST_CASE("empty notebook") {
  DomState s = new_state();
  CHECK(s.revision() == 0);
  CHECK(s.user_node_count() == 0);
  CHECK(serialize(s) == std::string(oracle::kHead) + oracle::kTail);
  CHECK(s.lookup("root") == s.body());
  CHECK(s.lookup("document") == s.document());
}

TEST_CASE("insert appends under root by default and honours anchors") {
  DomState s = with("<div id='a'>one</div>");
  REQUIRE_FALSE(apply_in_place(s, InsertAction{"<div id='c'>three</div>", std::nullopt, std::nullopt}));
  REQUIRE_FALSE(apply_in_place(s, InsertAction{"<div id='b'>two</div>", std::string("root"), std::string("c")}));
  CHECK(body_ids(s) == std::vector<std::string>{"a", "b", "c"});
  CHECK(s.revision() == 3);
  CHECK(serialize_body(s) == "  <div id=\"a\">one</div>\n  <div id=\"b\">two</div>\n  <div id=\"c\">three</div>\n");
}

TEST_CASE("insert of several roots keeps their order") {
  DomState s = with("<div id='a'/><div id='z'/>");
  REQUIRE_FALSE(apply_in_place(s, InsertAction{"<div id='b'/><div id='c'/>", std::nullopt, std::string("z")}));
  CHECK(body_ids(s) == std::vector<std::string>{"a", "b", "c", "z"});
}

TEST_CASE("modify sets, overwrites and removes attributes in order") {
  DomState s = with("<svg id='s' width='300' height='200'><rect id='r' x='1' y='2' width='3' height='4'/></svg>");
  REQUIRE_FALSE(apply_in_place(s, ModifyAction{"r", {{"x", std::string("20")}, {"fill", std::string("#a629a6")}, {"y", std::nullopt}}}));
  CHECK(serialize_subtree(s, *s.lookup("r")) == "<rect id=\"r\" x=\"20\" width=\"3\" height=\"4\" fill=\"#a629a6\"/>\n");
}

TEST_CASE("modify text of a leaf") {
  DomState s = with("<div id='d'><span id='t'>old</span></div>");
  REQUIRE_FALSE(apply_in_place(s, ModifyAction{"t", {{"#text", std::string("new & <b>")}}}));
  CHECK(serialize_subtree(s, *s.lookup("t")) == "<span id=\"t\">new &amp; &lt;b&gt;</span>\n");
  REQUIRE_FALSE(apply_in_place(s, ModifyAction{"t", {{"#text", std::nullopt}}}));
  CHECK(serialize_subtree(s, *s.lookup("t")) == "<span id=\"t\"/>\n");
}

TEST_CASE("replace keeps the position and may reuse the target's ids") {
  DomState s = with("<div id='a'/><div id='b'><span id='b1'>x</span></div><div id='c'/>");
  REQUIRE_FALSE(apply_in_place(s, ReplaceAction{"b", "<ul id='b'><li id='b1'>y</li></ul>"}));
  CHECK(body_ids(s) == std::vector<std::string>{"a", "b", "c"});
  CHECK(s.node(*s.lookup("b")).tag == "ul");
  REQUIRE_FALSE(apply_in_place(s, ReplaceAction{"b", "<div id='p'/><div id='q'/>"}));
  CHECK(body_ids(s) == std::vector<std::string>{"a", "p", "q", "c"});
  CHECK_FALSE(s.lookup("b1"));
}

TEST_CASE("delete drops the whole subtree from the address map") {
  DomState s = with("<div id='a'><ul id='u'><li id='l1'>1</li><li id='l2'>2</li></ul></div><div id='b'/>");
  REQUIRE_FALSE(apply_in_place(s, DeleteAction{"a"}));
  CHECK(s.id_count() == 1 + 2);  // b, root, document
  CHECK_FALSE(s.lookup("l2"));
  // Freed ids can be reused.
  REQUIRE_FALSE(apply_in_place(s, InsertAction{"<div id='l2'/>", std::nullopt, std::nullopt}));
}

TEST_CASE("clear empties the notebook but keeps revision history") {
  DomState s = with("<div id='a'/><div id='b'/>");
  REQUIRE_FALSE(apply_in_place(s, ClearAction{}));
  CHECK(s.user_node_count() == 0);
  CHECK(s.revision() == 2);
  CHECK(serialize(s) == serialize(new_state()));
}

TEST_CASE("reserved ids cannot be targeted") {
  DomState s = with("<div id='a'/>");
  for (const char* id : {"root", "document"}) {
    CHECK(apply_in_place(s, DeleteAction{id})->kind == ApplyErrorKind::ReservedTarget);
    CHECK(apply_in_place(s, ModifyAction{id, {{"class", std::string("x")}}})->kind == ApplyErrorKind::ReservedTarget);
    CHECK(apply_in_place(s, ReplaceAction{id, "<div id='z'/>"})->kind == ApplyErrorKind::ReservedTarget);
  }
}

TEST_CASE("rejections carry a kind") {
  DomState s = with("<div id='a'><span id='s'>x</span></div><div id='b'/>");
  CHECK(apply_in_place(s, DeleteAction{"zz"})->kind == ApplyErrorKind::UnknownTarget);
  CHECK(apply_in_place(s, InsertAction{"<div id='a'/>", std::nullopt, std::nullopt})->kind == ApplyErrorKind::DuplicateId);
  CHECK(apply_in_place(s, InsertAction{"<div id='n'/>", std::string("a"), std::string("b")})->kind ==
        ApplyErrorKind::InvalidAnchor);
  auto bad = apply_in_place(s, InsertAction{"<div id='n'>", std::nullopt, std::nullopt});
  REQUIRE(bad);
  CHECK(bad->kind == ApplyErrorKind::InvalidFragment);
  REQUIRE(bad->diagnostic);
  CHECK(bad->diagnostic->kind == DiagnosticKind::MalformedMarkup);
  CHECK(s.revision() == 1);
}

TEST_CASE("functional apply leaves the input alone") {
  DomState s = with("<div id='a'/>");
  std::string before = serialize(s);
  auto next = canvascot::apply(s, DeleteAction{"a"});
  REQUIRE(next.ok());
  CHECK(serialize(s) == before);
  CHECK(next->user_node_count() == 0);
  CHECK(next->revision() == s.revision() + 1);
}

TEST_CASE("serialize and parse_document round trip") {
  DomState s = corpus::base_document();
  std::string text = serialize(s);
  auto back = parse_document(text);
  REQUIRE(back.ok());
  CHECK(serialize(back.value()) == text);
  CHECK(back->revision() == 0);
  CHECK(back->id_count() == s.id_count());
}

TEST_CASE("rejected actions leave the state byte-identical") {
  DomState s = corpus::base_document();
  std::string before = serialize(s);
  auto actions = corpus::rejection_corpus();
  CHECK(actions.size() >= 200);
  for (const auto& a : actions) {
    auto err = apply_in_place(s, a);
    CHECK_MESSAGE(err, "accepted: " << encode_tool_call(a));
    if (!err) s = corpus::base_document();
    CHECK(serialize(s) == before);
    CHECK(s.revision() == 1);
  }
}

TEST_CASE("address map agrees with the tree") {
  gen::Generator g(7);
  oracle::Document doc;
  DomState s = new_state();
  for (int step = 0; step < 400; ++step) {
    Action a = g.next(doc.written());
    REQUIRE_FALSE(apply_in_place(s, a));
    gen::apply_to_oracle(doc, a);
    auto expected = oracle::Document::ids(doc.body());
    expected.push_back("root");
    expected.push_back("document");
    std::set<std::string> want(expected.begin(), expected.end());
    std::set<std::string> got;
    for (auto id : s.ids()) got.emplace(id);
    REQUIRE(got == want);
    for (const auto& id : want) CHECK(s.node(*s.lookup(id)).id() == std::optional<std::string_view>(id));
  }
}

TEST_CASE("random sequences match the oracle") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    gen::Generator g(seed);
    oracle::Document doc;
    DomState s = new_state();
    for (int step = 0; step < 200; ++step) {
      Action a = g.next(doc.written());
      auto err = apply_in_place(s, a);
      bool accepted = gen::apply_to_oracle(doc, a);
      INFO("seed " << seed << " step " << step << " " << encode_tool_call(a));
      REQUIRE(!err == accepted);
      REQUIRE(serialize(s) == doc.text);
    }
  }
}

TEST_CASE("replace keeps the sibling index") {
  gen::Generator g(99);
  int cases = 0;
  for (int tree = 0; tree < 20; ++tree) {
    oracle::Document doc;
    DomState s = new_state();
    for (int step = 0; step < 60; ++step) {
      Action a = g.next(doc.written());
      if (std::holds_alternative<ClearAction>(a) || std::holds_alternative<DeleteAction>(a)) continue;
      if (!apply_in_place(s, a)) gen::apply_to_oracle(doc, a);
    }
    auto body = doc.body();
    std::vector<gen::Located> all;
    gen::flatten(body, nullptr, all);
    for (int k = 0; k < 50 && !all.empty(); ++k) {
      const auto& target = g.pick(all);
      NodeHandle h = *s.lookup(target.node->id());
      std::size_t index = s.sibling_index(h);
      NodeHandle parent = s.node(h).parent;
      auto action = std::get<ReplaceAction>(g.replace(target));
      auto r = canvascot::apply(s, action);
      REQUIRE(r.ok());
      std::string new_id(*parse_fragment(action.fragment)->roots.at(0).id());
      NodeHandle fresh = *r->lookup(new_id);
      CHECK(r->node(fresh).parent == parent);
      CHECK(r->sibling_index(fresh) == index);
      ++cases;
    }
  }
  CHECK(cases == 1000);
}

TEST_CASE("lookup cost does not depend on document size") {
  auto cost = [](int n) {
    std::string markup = "<div id='box'>";
    for (int i = 0; i < n; ++i) markup += "<span id='s" + std::to_string(i) + "'>x</span>";
    markup += "</div>";
    DomState s = with(markup.c_str());
    std::string target = "s" + std::to_string(n / 2);
    s.reset_visits();
    REQUIRE_FALSE(apply_in_place(s, ModifyAction{target, {{"class", std::string("hot")}}}));
    return s.visits();
  };
  std::uint64_t small = cost(10), large = cost(5000);
  CHECK(small > 0);
  CHECK(large == small);
}
