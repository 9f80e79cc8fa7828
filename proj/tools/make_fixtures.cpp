// Regenerates the committed fixtures under tests/fixtures and tests/golden.
// Usage: canvascot_fixtures <repo root>

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "canvascot/chat.hpp"
#include "canvascot/image_io.hpp"
#include "canvascot/trajectory.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace canvascot;

namespace {

bool check(const std::optional<std::string>& err) {
  if (err) std::fprintf(stderr, "%s\n", err->c_str());
  return !err;
}

// --- bar chart correction --------------------------------------------------

const char* kSeedSvg = R"(<svg id="main_svg" viewBox="0 0 300 600">
  <rect id="bar1" x="10" y="40" width="87" height="450" fill="#b030b0"/>
  <rect id="bar2" x="145" y="206" width="87" height="284" fill="#b030b0"/>
  <rect id="bar3" x="280" y="247" width="87" height="243" fill="#b030b0"/>
  <text id="cost1" x="12" y="30" font-size="14">$130.96</text>
  <text id="cost2" x="150" y="196" font-size="14">$82.65</text>
  <text id="cost3" x="282" y="237" font-size="14">$70.72</text>
  <text id="label1" x="10" y="530" font-size="14">Ford F150</text>
  <text id="label2" x="140" y="530" font-size="14">Toyota RAV4</text>
  <text id="label3" x="270" y="530" font-size="14">Honda Civic</text>
</svg>)";

const char* kFinalSvg = R"(<svg id="main_svg" viewBox="0 0 300 600">
  <rect id="bar1" fill="#a629a6" height="450" width="70" x="20" y="20" rx="4" ry="4"/>
  <rect id="bar2" fill="#a629a6" height="284" width="70" x="115" y="186" rx="4" ry="4"/>
  <rect id="bar3" fill="#a629a6" height="243" width="70" x="210" y="227" rx="4" ry="4"/>
  <text id="cost1" x="55" y="14" font-size="14" text-anchor="middle">$130.96</text>
  <text id="cost2" x="150" y="180" font-size="14" text-anchor="middle">$82.65</text>
  <text id="cost3" x="245" y="221" font-size="14" text-anchor="middle">$70.72</text>
  <text id="label1" x="55" y="492" font-size="14" text-anchor="middle">Ford F150</text>
  <text id="label2" x="150" y="492" font-size="14" text-anchor="middle">Toyota RAV4</text>
  <text id="label3" x="245" y="492" font-size="14" text-anchor="middle">Honda Civic</text>
</svg>)";

const char* kGoal =
    "Correct the starting bar chart SVG so that its render matches the reference chart of fueling costs. Edit the "
    "notebook with CRUD tool calls and answer with the final SVG.";

const char* kAnalysis =
    "<div id='analysis'><strong>Issues found</strong><ul>"
    "<li>1. Layout: the third bar at x=280 with width=87 ends at x=367, outside the 0 0 300 600 viewBox</li>"
    "<li>2. Proportions: heights are close, but positions, widths and spacing are off</li>"
    "<li>3. Color: fill #b030b0 should be #a629a6</li>"
    "<li>4. Shape: the reference bars have rounded corners</li>"
    "<li>5. Text: costs and labels sit in the wrong places</li>"
    "</ul></div>";

std::string call(const std::string& name, nlohmann::ordered_json args) {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["arguments"] = std::move(args);
  return "<tool_call>" + j.dump() + "</tool_call>";
}

std::vector<std::string> bar_chart_script() {
  std::vector<std::string> out;
  out.push_back(
      "<think>Compare the reference with the render of the starting SVG. The third bar at x=280 with width=87 runs to "
      "x=367, past the 300px viewBox. Heights are roughly right but widths, spacing and offsets are not. The fill "
      "#b030b0 is duller than the reference #a629a6, and the reference bars have rounded corners. Labels and costs "
      "are misplaced as a consequence. Plan: write the issues down, then replace main_svg with a recomputed "
      "layout.</think>\n" +
      call("insert_element", {{"rootId", "root"}, {"fragment", kAnalysis}}));
  out.push_back(
      "<think>New layout inside viewBox 0 0 300 600: bar width 70, gap 25, left margin 20, so x = 20, 115, 210. "
      "Heights 450, 284, 243 with all bottoms at y=470. Rounded corners rx=ry=4, fill #a629a6. Replace main_svg in "
      "one step.</think>\n" +
      call("replace_element", {{"targetId", "main_svg"}, {"fragment", kFinalSvg}}));
  out.push_back(
      "<think>The chart now matches the reference. Remove the analysis note and give the final SVG.</think>\n" +
      call("remove_element", {{"targetId", "analysis"}}) + "\n<answer>" + std::string(kFinalSvg) + "</answer>");
  return out;
}

bool write_bar_chart(const fs::path& dir) {
  fs::create_directories(dir);
  EpisodeConfig config;

  // Reference: the corrected chart alone on the notebook.
  DomState target = new_state(config.state_options());
  if (auto e = apply_in_place(target, InsertAction{kFinalSvg, std::string(kRootId), std::nullopt})) {
    std::fprintf(stderr, "%s\n", e->describe().c_str());
    return false;
  }
  RasterImage reference = render(target, config.render_options()).value().image;

  Task task;
  task.instruction = svg_task_instruction(
      kGoal,
      kSeedSvg);
  task.reference = reference;
  task.seed = kSeedSvg;

  nlohmann::ordered_json tj;
  tj["goal"] = kGoal;
  tj["seed"] = kSeedSvg;
  tj["svgTemplate"] = true;
  tj["image"] = "reference.png";
  if (!check(write_file(dir / "task.json", tj.dump(2) + "\n"))) return false;
  if (!check(write_file(dir / "reference.png", encode_png(reference)))) return false;
  nlohmann::ordered_json script = bar_chart_script();
  if (!check(write_file(dir / "script.json", script.dump(2) + "\n"))) return false;

  // Record the cassette from the script, then produce the trajectory from
  // the cassette the same way `canvascot run --cassette` does.
  ScriptedSolver scripted(bar_chart_script());
  RecordingSolver recorder(scripted);
  DiffCritic critic(config.diff);
  EpisodeResult recorded = run_episode(task, recorder, &critic, config);
  if (recorded.status != EpisodeStatus::Answered) {
    std::fprintf(stderr, "bar chart script did not answer: %s\n", recorded.failure.value_or("").c_str());
    return false;
  }
  if (!check(recorder.cassette().save(dir / "cassette.json"))) return false;

  CassetteSolver cassette(recorder.cassette());
  EpisodeResult result = run_episode(task, cassette, &critic, config);
  Trajectory t{make_header(task, config), result.trajectory, make_end(result)};
  if (!check(write_file(dir / "trajectory.jsonl", to_jsonl(t)))) return false;
  if (!check(write_file(dir / "final.html", serialize(result.final_state)))) return false;
  for (const auto& s : result.trajectory) {
    auto doc = parse_document(s.state_snapshot, config.state_options());
    RasterImage img = render(doc.value(), config.render_options()).value().image;
    if (!check(write_file(dir / ("step_" + std::to_string(s.index) + ".png"), encode_png(img)))) return false;
  }
  std::printf("bar chart: %zu steps, %s\n", result.trajectory.size(), std::string(to_string(result.status)).c_str());
  return true;
}

// --- render fixture states -------------------------------------------------

const std::vector<std::pair<const char*, std::vector<const char*>>>& render_states() {
  static const std::vector<std::pair<const char*, std::vector<const char*>>> states = {
      {"empty", {}},
      {"single_rect", {R"(<svg id="s" width="200" height="120"><rect id="r1" x="20" y="20" width="70" height="80" fill="#a629a6"/></svg>)"}},
      {"rounded_bars",
       {R"(<svg id="main_svg" viewBox="0 0 300 600"><rect id="bar1" fill="#a629a6" height="450" width="70" x="20" y="20" rx="4" ry="4"/><rect id="bar2" fill="#a629a6" height="284" width="70" x="115" y="186" rx="4" ry="4"/><rect id="bar3" fill="#a629a6" height="243" width="70" x="210" y="227" rx="4" ry="4"/></svg>)"}},
      {"circles",
       {R"(<svg id="s" width="400" height="200"><circle id="c1" cx="60" cy="100" r="50" fill="#1377EB"/><circle id="c2" cx="180" cy="100" r="50" fill="none" stroke="#ED2633" stroke-width="6"/><ellipse id="e1" cx="320" cy="100" rx="70" ry="40" fill="#009E5F" fill-opacity="0.6"/></svg>)"}},
      {"lines",
       {R"(<svg id="s" width="400" height="200"><line id="l1" x1="10" y1="10" x2="390" y2="190" stroke="black" stroke-width="3"/><line id="l2" x1="10" y1="190" x2="390" y2="10" stroke="teal" stroke-width="8" stroke-linecap="round"/><line id="l3" x1="20" y1="100" x2="380" y2="100" stroke="orange" stroke-width="4" stroke-dasharray="12 6"/></svg>)"}},
      {"polyline_polygon",
       {R"(<svg id="s" width="400" height="220"><polyline id="pl" points="20,200 100,40 180,160 260,60 380,180" fill="none" stroke="#1377EB" stroke-width="5" stroke-linejoin="round"/><polygon id="pg" points="200,20 240,100 160,100" fill="gold" stroke="black" stroke-width="2"/></svg>)"}},
      {"paths",
       {R"(<svg id="s" width="400" height="240"><path id="p1" d="M20 200 C 80 20, 160 20, 200 200 S 320 380, 380 120" fill="none" stroke="purple" stroke-width="4"/><path id="p2" d="M220 40 h80 v60 h-80 z" fill="#ED2633"/><path id="p3" d="M60 60 A 40 40 0 1 0 140 60 Q 100 10 60 60 Z" fill="#009E5F" stroke="black"/></svg>)"}},
      {"evenodd",
       {R"(<svg id="s" width="300" height="200"><path id="star" d="M150 10 L 190 190 L 40 70 L 260 70 L 110 190 Z" fill="navy" fill-rule="evenodd"/></svg>)"}},
      {"svg_text",
       {R"(<svg id="s" width="400" height="160"><text id="t1" x="20" y="40" font-size="18">Start anchor</text><text id="t2" x="200" y="90" font-size="16" text-anchor="middle" fill="#1377EB">Middle anchor</text><text id="t3" x="380" y="140" font-size="14" text-anchor="end" font-weight="bold">End anchor</text></svg>)"}},
      {"group_transform",
       {R"F(<svg id="s" width="400" height="240"><g id="g1" transform="translate(100,40) rotate(20)" fill="#1377EB"><rect id="gr1" x="0" y="0" width="120" height="60"/><circle id="gc1" cx="60" cy="120" r="30" fill="#ED2633"/></g><g id="g2" transform="scale(0.5)" stroke="black" stroke-width="4"><rect id="gr2" x="500" y="200" width="200" height="150" fill="none"/></g></svg>)F"}},
      {"viewbox_scaling",
       {R"(<svg id="s" width="400" height="200" viewBox="0 0 100 100"><rect id="r" x="10" y="10" width="80" height="80" fill="#009E5F"/><circle id="c" cx="50" cy="50" r="30" fill="white"/></svg>)"}},
      {"div_text",
       {R"(<div id="note">A plain block of notebook text that is long enough to wrap across more than one line inside the fixed canvas width.</div>)"}},
      {"div_background",
       {R"(<div id="card" style="background-color:#eef;font-size:17px"><strong>Problem Setup</strong> The bars are <span id="s1" style="color:#ED2633">too wide</span> and misplaced.</div>)"}},
      {"list",
       {R"(<div id="analysis"><strong>Issues</strong><ul id="u"><li id="l1">Layout and sizing</li><li id="l2">Color #b030b0 vs #a629a6</li><li id="l3">Corners need rounding</li></ul></div>)"}},
      {"table",
       {R"(<table id="tb"><tr><td>car</td><td>cost</td></tr><tr><td>Ford F150</td><td><strong>$130.96</strong></td></tr><tr><td>Toyota RAV4</td><td>$82.65</td></tr></table>)"}},
      {"stacked_blocks",
       {R"(<div id="a">first block</div>)", R"(<div id="b" style="background:#ffe">second block with a background</div>)",
        R"(<svg id="c" width="300" height="60"><rect id="cr" x="0" y="0" width="300" height="60" fill="#ddd"/></svg>)"}},
      {"loose_primitives",
       {R"(<rect id="lr" x="10" y="10" width="120" height="40" fill="#1377EB"/>)",
        R"(<text id="lt" x="10" y="30" font-size="16">loose text</text>)"}},
      {"opacity_overlap",
       {R"(<svg id="s" width="300" height="200"><rect id="a" x="20" y="20" width="160" height="120" fill="red" opacity="0.5"/><rect id="b" x="120" y="60" width="160" height="120" fill="blue" fill-opacity="0.5" stroke="black" stroke-opacity="0.3" stroke-width="6"/></svg>)"}},
      {"stroke_joins",
       {R"(<svg id="s" width="420" height="160"><polyline id="m" points="20,140 60,20 100,140" fill="none" stroke="black" stroke-width="12" stroke-linejoin="miter"/><polyline id="b" points="160,140 200,20 240,140" fill="none" stroke="black" stroke-width="12" stroke-linejoin="bevel"/><polyline id="r" points="300,140 340,20 380,140" fill="none" stroke="black" stroke-width="12" stroke-linejoin="round" stroke-linecap="square"/></svg>)"}},
      {"bar_chart_seed", {kSeedSvg}},
  };
  return states;
}

bool write_render_states(const fs::path& states_dir, const fs::path& golden_dir) {
  fs::create_directories(states_dir);
  fs::create_directories(golden_dir);
  int k = 0;
  for (const auto& [name, fragments] : render_states()) {
    ++k;
    DomState s = new_state();
    for (const char* f : fragments) {
      if (auto e = apply_in_place(s, InsertAction{f, std::nullopt, std::nullopt})) {
        std::fprintf(stderr, "%s: %s\n", name, e->describe().c_str());
        return false;
      }
    }
    char stem[64];
    std::snprintf(stem, sizeof stem, "%02d_%s", k, name);
    auto r = render(s);
    if (!r) {
      std::fprintf(stderr, "%s: %s\n", name, r.error().message.c_str());
      return false;
    }
    if (!check(write_file(states_dir / (std::string(stem) + ".html"), serialize(s)))) return false;
    if (!check(write_file(golden_dir / (std::string(stem) + ".png"), encode_png(r.value().image)))) return false;
  }
  std::printf("render states: %d\n", k);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: canvascot_fixtures <repo root>\n");
    return 2;
  }
  fs::path root = argv[1];
  if (!write_bar_chart(root / "tests/fixtures/bar_chart")) return 1;
  if (!write_render_states(root / "tests/fixtures/states", root / "tests/golden")) return 1;
  return 0;
}
