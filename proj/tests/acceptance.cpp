// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "canvascot/digest.hpp"
#include "canvascot/image_io.hpp"
#include "canvascot/orchestrator.hpp"
#include "canvascot/protocol.hpp"
#include "canvascot/render.hpp"
#include "canvascot/trajectory.hpp"
#include "canvascot/workload.hpp"
#include "corpus.hpp"
#include "episodes.hpp"
#include "fixture.hpp"
#include "oracle.hpp"
#include "random_actions.hpp"

using namespace canvascot;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CANVASCOT_TEST_DATA;

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string attr(const DomState& s, std::string_view id, std::string_view name) {
  auto h = s.lookup(id);
  if (!h) return "<no node>";
  const std::string* v = s.node(*h).attrs.find(name);
  return v ? *v : "<missing>";
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(CANVASCOT_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Seeds are independent, so they are shared out over the available cores.
Outcome oracle_equivalence() {
  auto t0 = std::chrono::steady_clock::now();
  constexpr std::uint64_t kSeeds = 1000;
  std::atomic<std::uint64_t> next{1};
  std::atomic<long> steps{0};
  std::mutex mu;
  std::string first_failure;
  auto work = [&] {
    for (std::uint64_t seed; (seed = next++) <= kSeeds;) {
      gen::Generator g(seed);
      oracle::Document doc;
      DomState s = new_state();
      for (int step = 0; step < 200; ++step) {
        Action a = g.next(doc.written());
        bool ok = !apply_in_place(s, a);
        bool want = gen::apply_to_oracle(doc, a);
        if (ok != want || serialize(s) != doc.text) {
          std::lock_guard lock(mu);
          if (first_failure.empty())
            first_failure = "seed " + std::to_string(seed) + " step " + std::to_string(step) + ": " + encode_tool_call(a);
          next = kSeeds + 1;
          return;
        }
        ++steps;
      }
    }
  };
  unsigned n = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (!first_failure.empty()) return fail(first_failure);
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << kSeeds << " x 200 steps, 0 mismatches (" << steps << " steps, " << n << " threads) in " << secs << " s";
  if (secs >= 30) return fail(d.str() + ", over 30 s");
  return {true, d.str()};
}

Outcome atomicity() {
  DomState s = corpus::base_document();
  const std::string before = serialize(s);
  auto actions = corpus::rejection_corpus();
  if (actions.size() < 200) return fail("corpus has only " + std::to_string(actions.size()) + " entries");
  for (const auto& a : actions) {
    if (!apply_in_place(s, a)) return fail("accepted: " + encode_tool_call(a));
    if (serialize(s) != before || s.revision() != 1) return fail("state changed by " + encode_tool_call(a));
  }
  return {true, std::to_string(actions.size()) + " rejected actions, state byte-identical after each"};
}

Outcome replace_position() {
  gen::Generator g(2024);
  int cases = 0;
  while (cases < 10000) {
    oracle::Document doc;
    DomState s = new_state();
    for (int step = 0; step < 60; ++step) {
      Action a = g.next(doc.written());
      if (std::holds_alternative<ClearAction>(a) || std::holds_alternative<DeleteAction>(a)) continue;
      if (!apply_in_place(s, a)) gen::apply_to_oracle(doc, a);
    }
    const auto& body = doc.written();
    std::vector<gen::Located> all;
    gen::flatten(body, nullptr, all);
    for (int k = 0; k < 50 && !all.empty() && cases < 10000; ++k, ++cases) {
      const auto& target = g.pick(all);
      NodeHandle h = *s.lookup(target.node->id());
      std::size_t index = s.sibling_index(h);
      NodeHandle parent = s.node(h).parent;
      auto action = std::get<ReplaceAction>(g.replace(target));
      auto r = canvascot::apply(s, action);
      if (!r.ok()) return fail("rejected: " + encode_tool_call(action));
      std::string fresh_id(*parse_fragment(action.fragment)->roots.at(0).id());
      NodeHandle fresh = *r->lookup(fresh_id);
      if (r->node(fresh).parent != parent || r->sibling_index(fresh) != index)
        return fail("position moved after " + encode_tool_call(action));
    }
  }
  return {true, std::to_string(cases) + " replacements kept parent and sibling index"};
}

Outcome render_determinism() {
  int states = 0;
  for (const auto& e : fs::directory_iterator(kData / "fixtures/states")) {
    std::string name = e.path().stem().string();
    auto text = read_file(e.path());
    if (!text) return fail(text.error().message);
    auto s = parse_document(text.value());
    if (!s) return fail(name + " does not parse");
    auto golden = read_file(kData / "golden" / (name + ".png"));
    if (!golden) return fail("no golden for " + name);
    for (int k = 0; k < 100; ++k) {
      auto r = render(s.value());
      if (!r) return fail(name + " failed to render");
      if (encode_png(r->image) != golden.value()) return fail(name + " render " + std::to_string(k) + " differs from golden");
    }
    ++states;
  }
  if (states != 20) return fail("expected 20 fixture states, found " + std::to_string(states));
  return {true, "20 states x 100 renders byte-identical to the goldens"};
}

Outcome bar_chart_replay() {
  Trajectory logged = fixture::bar_chart_trajectory();
  Task task = fixture::task_of(logged.header);
  CassetteSolver solver(fixture::bar_chart_cassette());
  DiffCritic critic(logged.header.config.diff);
  EpisodeResult r = run_episode(task, solver, &critic, logged.header.config);
  if (r.status != EpisodeStatus::Answered || r.trajectory.size() != 3)
    return fail("status " + std::string(to_string(r.status)) + " after " + std::to_string(r.trajectory.size()) + " steps");
  auto first = [&](int k) -> const Action* {
    const auto& acts = r.trajectory[k].actions;
    return acts.empty() || !acts[0].accepted ? nullptr : &acts[0].action;
  };
  auto* a1 = first(0);
  auto* a2 = first(1);
  auto* a3 = first(2);
  if (!a1 || !std::holds_alternative<InsertAction>(*a1) ||
      std::get<InsertAction>(*a1).fragment.find("id='analysis'") == std::string::npos)
    return fail("round 1 is not the analysis insert");
  if (!a2 || !std::holds_alternative<ReplaceAction>(*a2) || std::get<ReplaceAction>(*a2).target_id != "main_svg")
    return fail("round 2 is not the main_svg replace");
  if (!a3 || !std::holds_alternative<DeleteAction>(*a3) || std::get<DeleteAction>(*a3).target_id != "analysis")
    return fail("round 3 is not the analysis removal");
  const DomState& s = r.final_state;
  std::vector<std::pair<const char*, const char*>> want = {
      {"x", "20"}, {"y", "20"}, {"width", "70"}, {"height", "450"}, {"fill", "#a629a6"}, {"rx", "4"}};
  for (auto [k, v] : want)
    if (attr(s, "bar1", k) != v) return fail(std::string("bar1 ") + k + " = " + attr(s, "bar1", k));
  Trajectory again{make_header(task, logged.header.config), r.trajectory, make_end(r)};
  if (to_jsonl(again) != to_jsonl(logged)) return fail("rerun differs from the committed trajectory");
  int code = run_cli("replay " + (fixture::bar_chart_dir() / "trajectory.jsonl").string());
  if (code != 0) return fail("replay exited " + std::to_string(code));
  return {true, "insert analysis, replace main_svg, remove analysis; bar1 matches; replay exit 0"};
}

Outcome pruning() {
  int contexts = 0, steps = 0, leaks = 0;
  for (std::uint64_t seed = 5000; seed < 5100; ++seed) {
    auto o = episodes::pruning_episode(seed);
    contexts += o.contexts;
    steps += o.steps;
    leaks += o.leaks;
    if (o.leaks) return fail("seed " + std::to_string(seed) + " leaked " + o.leaked.front());
  }
  return {leaks == 0, "100 episodes, " + std::to_string(steps) + " steps, " + std::to_string(contexts) + " contexts, 0 leaks"};
}

Outcome token_trend() {
  auto c10 = correction_cost(10), c100 = correction_cost(100), c1000 = correction_cost(1000);
  std::ostringstream d;
  d << "regeneration " << c10.regeneration << "/" << c100.regeneration << "/" << c1000.regeneration << ", modify "
    << c10.modify << "/" << c100.modify << "/" << c1000.modify << ", ratio(1000)/ratio(10) = " << c1000.ratio() / c10.ratio();
  // Linear growth: per-element regeneration cost does not shrink with N.
  if (c1000.regeneration * 10 < c10.regeneration * 1000 / 2) return fail(d.str() + ": regeneration sublinear");
  if (c1000.modify > c10.modify + 1 || c100.modify > c10.modify + 1) return fail(d.str() + ": modify grows with N");
  if (c1000.ratio() < 10 * c10.ratio()) return fail(d.str());
  return {true, d.str()};
}

Outcome budget() {
  const std::string never =
      "<think>not yet</think><tool_call>" + encode_tool_call(ModifyAction{"a", {{"class", std::string("x")}}}) + "</tool_call>";
  Task t;
  t.instruction = "edit the notebook";
  t.seed = "<div id='a'>start</div>";
  for (int b : {1, 6}) {
    ScriptedSolver solver({never}, true);
    EpisodeConfig config;
    config.budget = b;
    config.critic = CriticKind::None;
    EpisodeResult r = run_episode(t, solver, nullptr, config);
    if (r.status != EpisodeStatus::BudgetExhausted) return fail("B=" + std::to_string(b) + " ended " + std::string(to_string(r.status)));
    if (int(r.trajectory.size()) != b) return fail("B=" + std::to_string(b) + " took " + std::to_string(r.trajectory.size()) + " steps");
    Trajectory traj{make_header(t, config), r.trajectory, make_end(r)};
    if (!replay(traj).ok()) return fail("B=" + std::to_string(b) + " does not replay");
  }
  return {true, "B=1 and B=6 end BudgetExhausted after exactly B steps"};
}

Outcome scope_statement() {
  auto readme = read_file(kData.parent_path() / "README.md");
  if (!readme) return fail("README.md not found");
  const std::string& text = readme.value();
  for (const char* needle : {"out of scope", "VCode", "RBench-V", "MathVista", "property suites", "acceptance substitute"})
    if (text.find(needle) == std::string::npos) return fail(std::string("README lacks \"") + needle + "\"");
  return {true, "README states benchmark scores are out of scope"};
}

}  // namespace

int main() {
  std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"CRUD oracle equivalence", oracle_equivalence},
      {"atomicity", atomicity},
      {"replace position invariance", replace_position},
      {"render determinism", render_determinism},
      {"bar chart cassette replay", bar_chart_replay},
      {"thought pruning", pruning},
      {"token efficiency trend", token_trend},
      {"budget semantics", budget},
      {"non-reproducible results stated", scope_statement},
  };
  int failures = 0, n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      o = check();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::printf("%d %s %s: %s [%.1f s]\n", n, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures;
}
