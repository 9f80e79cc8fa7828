#include <stdexcept>

#include "canvascot/orchestrator.hpp"
#include "canvascot/workload.hpp"
#include "doctest.h"
#include "fixture.hpp"

using namespace canvascot;

namespace {

std::string call(const Action& a) { return "<tool_call>" + encode_tool_call(a) + "</tool_call>"; }

const std::string kNever = "<think>keep going</think>" + call(ModifyAction{"a", {{"class", std::string("x")}}});

Task simple_task() {
  Task t;
  t.instruction = "edit the notebook";
  t.seed = "<div id='a'>start</div>";
  return t;
}

class BrokenCritic : public Critic {
 public:
  Result<CritiqueReport, CriticError> critique(const CritiqueInput&) override { return CriticError{"endpoint down"}; }
};

std::string attr(const DomState& s, std::string_view id, std::string_view name) {
  auto h = s.lookup(id);
  if (!h) return "<no node>";
  const std::string* v = s.node(*h).attrs.find(name);
  return v ? *v : "<missing>";
}

}  // namespace

TEST_CASE("bar chart cassette reproduces the three rounds") {
  Trajectory logged = fixture::bar_chart_trajectory();
  Task task = fixture::task_of(logged.header);
  CassetteSolver solver(fixture::bar_chart_cassette());
  DiffCritic critic(logged.header.config.diff);
  EpisodeResult r = run_episode(task, solver, &critic, logged.header.config);

  REQUIRE(r.status == EpisodeStatus::Answered);
  REQUIRE(r.trajectory.size() == 3);
  auto only = [&](int k) {
    REQUIRE(r.trajectory[k].actions.size() >= 1);
    CHECK(r.trajectory[k].actions[0].accepted);
    return r.trajectory[k].actions[0].action;
  };
  auto a1 = only(0), a2 = only(1), a3 = only(2);
  CHECK(std::get<InsertAction>(a1).fragment.find("id='analysis'") != std::string::npos);
  CHECK(std::get<ReplaceAction>(a2).target_id == "main_svg");
  CHECK(std::get<DeleteAction>(a3).target_id == "analysis");

  const DomState& s = r.final_state;
  CHECK(attr(s, "bar1", "x") == "20");
  CHECK(attr(s, "bar1", "y") == "20");
  CHECK(attr(s, "bar1", "width") == "70");
  CHECK(attr(s, "bar1", "height") == "450");
  CHECK(attr(s, "bar1", "fill") == "#a629a6");
  CHECK(attr(s, "bar1", "rx") == "4");
  CHECK_FALSE(s.lookup("analysis"));

  // The answering round gets no critique.
  REQUIRE(r.trajectory[0].critique);
  CHECK(r.trajectory[0].critique->hallucination_detected);
  CHECK(r.trajectory[1].critique);
  CHECK_FALSE(r.trajectory[2].critique);

  Trajectory again{make_header(task, logged.header.config), r.trajectory, make_end(r)};
  CHECK(to_jsonl(again) == to_jsonl(logged));
}

TEST_CASE("answering at once takes one step") {
  ScriptedSolver solver({"<think>nothing to do</think><answer>42</answer>"});
  DiffCritic critic;
  EpisodeResult r = run_episode(simple_task(), solver, &critic, EpisodeConfig{});
  CHECK(r.status == EpisodeStatus::Answered);
  CHECK(r.answer == std::optional<std::string>("42"));
  REQUIRE(r.trajectory.size() == 1);
  CHECK(r.trajectory[0].actions.empty());
  CHECK_FALSE(r.trajectory[0].critique);
}

TEST_CASE("budget bounds the number of steps") {
  for (int budget : {1, 2, 6}) {
    ScriptedSolver solver({kNever}, true);
    EpisodeConfig config;
    config.budget = budget;
    EpisodeResult r = run_episode(simple_task(), solver, nullptr, config);
    CHECK(r.status == EpisodeStatus::BudgetExhausted);
    CHECK(int(r.trajectory.size()) == budget);
    CHECK(int(solver.calls()) == budget);
    CHECK_FALSE(r.answer);
  }
}

TEST_CASE("a protocol error consumes the turn and is reported back") {
  std::vector<std::string> seen;
  ScriptedSolver solver({"<think>oops", "<answer>done</answer>"});
  EpisodeObserver obs;
  obs.on_context = [&](int, const RenderedPrompt& p) { seen.push_back(p.messages.back().text); };
  EpisodeResult r = run_episode(simple_task(), solver, nullptr, EpisodeConfig{}, obs);
  REQUIRE(r.trajectory.size() == 2);
  const auto& bad = r.trajectory[0];
  REQUIRE(bad.protocol_error);
  CHECK(bad.protocol_error->rfind("ProtocolError UnclosedTag", 0) == 0);
  CHECK(bad.actions.empty());
  CHECK(bad.state_snapshot == r.trajectory[1].state_snapshot);
  REQUIRE(seen.size() == 2);
  CHECK(seen[1].find("[Protocol Error] ProtocolError UnclosedTag") != std::string::npos);
  CHECK(r.status == EpisodeStatus::Answered);
}

TEST_CASE("a failing solver ends the episode") {
  ScriptedSolver solver({kNever});
  EpisodeResult r = run_episode(simple_task(), solver, nullptr, EpisodeConfig{});
  CHECK(r.status == EpisodeStatus::SolverFailure);
  CHECK(r.trajectory.size() == 1);
  REQUIRE(r.failure);
  CHECK(r.failure->find("exhausted") != std::string::npos);
}

TEST_CASE("rejections and decode errors become notices for the next turn") {
  std::string turn = call(DeleteAction{"ghost"}) + "<tool_call>{broken</tool_call>" +
                     call(InsertAction{"<svg id='tall' width='10' height='30000'/>", std::nullopt, std::nullopt}) +
                     call(ModifyAction{"a", {{"#text", std::string("edited")}}});
  std::vector<std::string> tool_texts;
  ScriptedSolver solver({turn, "<answer>ok</answer>"});
  EpisodeObserver obs;
  obs.on_context = [&](int, const RenderedPrompt& p) { tool_texts.push_back(p.messages.back().text); };
  EpisodeResult r = run_episode(simple_task(), solver, nullptr, EpisodeConfig{}, obs);
  const auto& s = r.trajectory.at(0);
  REQUIRE(s.actions.size() == 3);
  CHECK_FALSE(s.actions[0].accepted);
  CHECK(s.actions[0].diagnostic->rfind("UnknownTarget", 0) == 0);
  CHECK_FALSE(s.actions[1].accepted);
  CHECK(s.actions[1].diagnostic->rfind("CanvasOverflow: ", 0) == 0);
  CHECK(s.actions[2].accepted);
  CHECK(s.actions[2].revision == 2);
  REQUIRE(s.notices.size() == 1);
  CHECK(s.notices[0].find("tool_call 2: MalformedPayload") == 0);

  ActionResult ar = action_result_of(s);
  CHECK(ar.tools == std::vector<std::string>{"remove_element", "insert_element", "modify_element"});
  REQUIRE(ar.rejections.size() == 2);
  CHECK(ar.rejections[0].rfind("remove_element ghost: UnknownTarget", 0) == 0);
  CHECK(ar.rejections[1].rfind("insert_element root: CanvasOverflow", 0) == 0);
  CHECK(tool_texts.at(1).find("[Rejected] remove_element ghost") != std::string::npos);
}

TEST_CASE("calls beyond the per-turn limit are ignored") {
  std::string turn;
  for (int i = 0; i < 5; ++i) turn += call(InsertAction{"<div id='n" + std::to_string(i) + "'/>", std::nullopt, std::nullopt});
  ScriptedSolver solver({turn + "<answer>a</answer><answer>b</answer>"});
  EpisodeConfig config;
  config.max_actions_per_turn = 3;
  EpisodeResult r = run_episode(simple_task(), solver, nullptr, config);
  const auto& s = r.trajectory.at(0);
  CHECK(s.actions.size() == 3);
  CHECK(r.final_state.lookup("n2"));
  CHECK_FALSE(r.final_state.lookup("n3"));
  REQUIRE(s.notices.size() == 2);
  CHECK(s.notices[0].find("tool_call 4 and later ignored") == 0);
  CHECK(s.notices[1] == "2 answer regions; the first one is used");
  CHECK(r.answer == std::optional<std::string>("a"));
}

TEST_CASE("critic failures do not stop the episode") {
  ScriptedSolver solver({kNever, "<answer>x</answer>"});
  BrokenCritic critic;
  EpisodeResult r = run_episode(simple_task(), solver, &critic, EpisodeConfig{});
  CHECK(r.status == EpisodeStatus::Answered);
  REQUIRE(r.trajectory.size() == 2);
  CHECK_FALSE(r.trajectory[0].critique);
  CHECK(r.trajectory[0].notices == std::vector<std::string>{"critic unavailable: endpoint down"});
}

TEST_CASE("invalid tasks") {
  ScriptedSolver solver({kNever});
  EpisodeConfig bad;
  bad.budget = 0;
  CHECK(run_episode(simple_task(), solver, nullptr, bad).status == EpisodeStatus::InvalidTask);
  Task t = simple_task();
  t.seed = "<div id='a'>";
  EpisodeResult r = run_episode(t, solver, nullptr, EpisodeConfig{});
  CHECK(r.status == EpisodeStatus::InvalidTask);
  CHECK(r.failure->rfind("seed rejected: ", 0) == 0);
  CHECK(solver.calls() == 0);
}

TEST_CASE("only the latest critique and result reach the solver") {
  std::vector<RenderedPrompt> prompts;
  RasterImage ref(50, 50, {0, 0, 0, 255});
  Task t = simple_task();
  t.reference = ref;
  ScriptedSolver solver({kNever, kNever, "<answer>x</answer>"});
  DiffCritic critic;
  EpisodeObserver obs;
  obs.on_context = [&](int, const RenderedPrompt& p) { prompts.push_back(p); };
  EpisodeResult r = run_episode(t, solver, &critic, EpisodeConfig{}, obs);
  REQUIRE(prompts.size() == 3);
  CHECK(prompts[0].messages.size() == 3);  // system, task, history (seed)
  for (std::size_t k = 1; k < prompts.size(); ++k) {
    REQUIRE(prompts[k].messages.size() == 4);
    const auto& tool = prompts[k].messages.back();
    CHECK(tool.role == "tool");
    CHECK(tool.images.size() == 2);
    std::size_t reports = 0;
    for (auto p = tool.text.find("[Critique Report]"); p != std::string::npos; p = tool.text.find("[Critique Report]", p + 1)) ++reports;
    CHECK(reports == 1);
  }
  CHECK(r.trajectory[0].critique->hallucination_detected);
}

TEST_CASE("convergence workload spends fewer output tokens each turn") {
  for (int n : {10, 100}) {
    auto script = convergence_script(n, 4);
    ScriptedSolver solver(script);
    EpisodeConfig config;
    config.budget = 8;
    Task t;
    t.instruction = "draw the grid";
    EpisodeResult r = run_episode(t, solver, nullptr, config);
    REQUIRE(r.status == EpisodeStatus::Answered);
    REQUIRE(r.trajectory.size() == script.size());
    for (std::size_t k = 1; k < r.trajectory.size(); ++k)
      CHECK(r.trajectory[k].tokens_out.count <= r.trajectory[k - 1].tokens_out.count);
    auto h = r.final_state.lookup("e" + std::to_string(n - 1));
    REQUIRE(h);
    CHECK(*r.final_state.node(*h).attrs.find("fill") == "#009E5F");
  }
}

TEST_CASE("token accounting on synthetic documents") {
  auto c10 = correction_cost(10), c100 = correction_cost(100), c1000 = correction_cost(1000);
  CHECK(c10.modify == c100.modify);
  CHECK(c100.modify + 1 >= c1000.modify);
  CHECK(c1000.regeneration >= 90 * c10.regeneration / 10);
  CHECK(c1000.ratio() >= 10 * c10.ratio());
  for (int n : {10, 100, 1000}) {
    DomState s = new_state();
    CHECK_FALSE(apply_in_place(s, InsertAction{synthetic_document(n), std::nullopt, std::nullopt}));
    CHECK(measure_height(s).ok());
  }
}

TEST_CASE("status and critic names") {
  for (auto s : {EpisodeStatus::Answered, EpisodeStatus::BudgetExhausted, EpisodeStatus::SolverFailure, EpisodeStatus::InvalidTask})
    CHECK(parse_episode_status(to_string(s)) == s);
  CHECK(parse_critic_kind("llm") == CriticKind::Llm);
  CHECK_FALSE(parse_critic_kind("human"));
}

TEST_CASE("svg task instruction") {
  std::string text = svg_task_instruction("Fix it.", "<svg id='x'/>");
  CHECK(text.rfind("Fix it.\n\n", 0) == 0);
  CHECK(text.find("<svg id='x'/>") != std::string::npos);
  CHECK(text.find("{current_svg_code}") == std::string::npos);
}
