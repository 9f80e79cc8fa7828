#include <filesystem>

#include "canvascot/critic.hpp"
#include "canvascot/digest.hpp"
#include "canvascot/trajectory.hpp"
#include "doctest.h"
#include "episodes.hpp"
#include "fixture.hpp"
#include "json.hpp"

using namespace canvascot;
namespace fs = std::filesystem;

namespace {

std::string fixture_text() { return read_file(fixture::bar_chart_dir() / "trajectory.jsonl").value(); }

// Rewrites one field of one JSONL line.
std::string tamper(const std::string& text, std::size_t line, const std::function<void(nlohmann::ordered_json&)>& edit) {
  std::string out;
  std::size_t start = 0, k = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    std::string l = text.substr(start, end - start);
    if (k == line) {
      auto j = nlohmann::ordered_json::parse(l);
      edit(j);
      l = j.dump();
    }
    out += l + "\n";
    start = end + 1;
    ++k;
  }
  return out;
}

DigestMismatch replay_error(const std::string& text) {
  auto t = parse_trajectory(text);
  REQUIRE(t.ok());
  auto r = replay(t.value());
  REQUIRE_FALSE(r.ok());
  return r.error();
}

}  // namespace

TEST_CASE("fixture replays cleanly") {
  auto t = fixture::bar_chart_trajectory();
  auto r = replay(t);
  REQUIRE_MESSAGE(r.ok(), (r.ok() ? "" : r.error().describe()));
  CHECK(r->steps == 3);
  CHECK(r->final_snapshot == read_file(fixture::bar_chart_dir() / "final.html").value());
  REQUIRE(t.end);
  CHECK(t.end->status == EpisodeStatus::Answered);
  CHECK(t.end->steps == 3);
}

TEST_CASE("jsonl round trip is byte-exact") {
  std::string text = fixture_text();
  auto t = parse_trajectory(text);
  REQUIRE(t.ok());
  CHECK(to_jsonl(t.value()) == text);
  CHECK(t->header.reference->width == 500);
  CHECK(t->header.reference->height == 600);
  CHECK(t->header.config.budget == 6);
}

TEST_CASE("line layout") {
  std::string text = fixture_text();
  std::vector<nlohmann::ordered_json> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    lines.push_back(nlohmann::ordered_json::parse(text.substr(start, end - start)));
    start = end + 1;
  }
  REQUIRE(lines.size() == 5);
  CHECK(lines[0]["type"] == "header");
  CHECK(lines[0]["version"] == 1);
  CHECK(lines[0]["referenceDigest"] == sha256_hex(*base64_decode(lines[0]["referencePng"].get<std::string>())));
  for (int k = 1; k <= 3; ++k) {
    CHECK(lines[k]["type"] == "step");
    CHECK(lines[k]["index"] == k);
    for (const char* key : {"contextDigest", "turn", "actions", "stateSnapshot", "renderDigest", "critique", "tokensIn",
                            "tokensOut", "rawOutput", "notices", "protocolError"})
      CHECK_MESSAGE(lines[k].contains(key), key);
    CHECK(lines[k]["stateSnapshot"].get<std::string>().rfind("<!DOCTYPE html>", 0) == 0);
  }
  CHECK(lines[4]["type"] == "end");
  CHECK(lines[4]["status"] == "Answered");
  CHECK(lines[4]["steps"] == 3);
}

TEST_CASE("tampering is detected at the right step") {
  std::string text = fixture_text();

  auto e = replay_error(tamper(text, 2, [](auto& j) { j["renderDigest"] = std::string(64, '0'); }));
  CHECK(e.step == 2);
  CHECK(e.what == "render");
  CHECK(e.describe().rfind("DigestMismatch at step 2 (render): expected 000", 0) == 0);

  e = replay_error(tamper(text, 1, [](auto& j) { j["contextDigest"] = std::string(64, 'f'); }));
  CHECK(e.step == 1);
  CHECK(e.what == "context");

  e = replay_error(tamper(text, 3, [](auto& j) {
    std::string s = j["stateSnapshot"];
    s.replace(s.find("#a629a6"), 7, "#a629a7");
    j["stateSnapshot"] = s;
  }));
  CHECK(e.step == 3);
  CHECK(e.what == "snapshot");

  e = replay_error(tamper(text, 2, [](auto& j) {
    j["actions"][0]["accepted"] = false;
    j["actions"][0]["diagnostic"] = "made up";
  }));
  CHECK(e.what == "action 1");

  e = replay_error(tamper(text, 1, [](auto& j) { j["tokensOut"] = 1; }));
  CHECK(e.what == "tokensOut");

  e = replay_error(tamper(text, 1, [](auto& j) { j["critique"] = nullptr; }));
  CHECK(e.what == "critique");

  // The header feeds every later context.
  e = replay_error(tamper(text, 0, [](auto& j) { j["instruction"] = "something else"; }));
  CHECK(e.step == 1);
  CHECK(e.what == "context");

  e = replay_error(tamper(text, 4, [](auto& j) { j["steps"] = 4; }));
  CHECK(e.what == "end");
}

TEST_CASE("parse errors carry the line number") {
  std::string text = fixture_text();
  auto cut = text.substr(0, text.find('\n') + 1) + "{\"type\":\"step\",\n";
  auto r = parse_trajectory(cut);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().line == 2);

  auto no_header = parse_trajectory("{\"type\":\"end\",\"status\":\"Answered\",\"answer\":null,\"steps\":0}\n");
  REQUIRE_FALSE(no_header.ok());
  CHECK(no_header.error().line == 1);

  auto missing = load_trajectory("/nonexistent/trajectory.jsonl");
  CHECK_FALSE(missing.ok());
}

TEST_CASE("truncated trajectories still replay their steps") {
  std::string text = fixture_text();
  std::size_t cut = 0;
  for (int k = 0; k < 3; ++k) cut = text.find('\n', cut) + 1;
  auto t = parse_trajectory(text.substr(0, cut));
  REQUIRE(t.ok());
  CHECK_FALSE(t->end);
  CHECK(t->steps.size() == 2);
  CHECK(replay(t.value()).ok());
}

TEST_CASE("writer flushes each line") {
  fs::path dir = fs::temp_directory_path() / "canvascot_writer_test";
  fs::create_directories(dir);
  fs::path file = dir / "t.jsonl";
  auto t = fixture::bar_chart_trajectory();
  {
    TrajectoryWriter w(file);
    REQUIRE(w.ok());
    w.write(header_line(t.header));
    CHECK(read_file(file).value() == header_line(t.header) + "\n");
    for (const auto& s : t.steps) w.write(step_line(s));
    w.write(end_line(*t.end));
  }
  CHECK(read_file(file).value() == fixture_text());
  fs::remove_all(dir);
  TrajectoryWriter bad(dir / "no/such/dir/x.jsonl");
  CHECK_FALSE(bad.ok());
}

TEST_CASE("random episodes replay after a jsonl round trip") {
  int steps = 0;
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    auto o = episodes::pruning_episode(seed);
    auto parsed = parse_trajectory(to_jsonl(o.trajectory));
    REQUIRE(parsed.ok());
    CHECK(to_jsonl(parsed.value()) == to_jsonl(o.trajectory));
    auto r = replay(parsed.value());
    INFO("seed " << seed);
    CHECK_MESSAGE(r.ok(), (r.ok() ? "" : r.error().describe()));
    steps += o.steps;
  }
  CHECK(steps > 60);
}
