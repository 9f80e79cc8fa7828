#include "canvascot/critic.hpp"
#include "canvascot/dom.hpp"
#include "doctest.h"

using namespace canvascot;

namespace {

RenderResult draw(const std::string& markup) {
  DomState s = new_state();
  REQUIRE_FALSE(apply_in_place(s, InsertAction{markup, std::nullopt, std::nullopt}));
  return render(s).value();
}

const char* kChart =
    "<svg id='chart' width='400' height='300'><rect id='left' x='20' y='20' width='100' height='200' fill='#1377EB'/>"
    "<rect id='right' x='250' y='120' width='100' height='100' fill='#1377EB'/></svg>";

class CannedBackend : public ChatBackend {
 public:
  explicit CannedBackend(Result<std::string, SolverError> reply) : reply_(std::move(reply)) {}
  Result<std::string, SolverError> complete(const std::vector<ChatMessage>& messages) override {
    seen = messages;
    return reply_;
  }
  std::vector<ChatMessage> seen;

 private:
  Result<std::string, SolverError> reply_;
};

}  // namespace

TEST_CASE("identical images give an empty report") {
  RenderResult r = draw(kChart);
  auto rep = deterministic_critic(r.image, r.image, DiffCriticOptions{}, r.boxes);
  REQUIRE(rep.ok());
  CHECK_FALSE(rep->hallucination_detected);
  CHECK(rep->issues.empty());
}

TEST_CASE("a moved bar is reported with its id") {
  RenderResult want = draw(kChart);
  std::string moved = kChart;
  moved.replace(moved.find("x='250'"), 7, "x='150'");
  RenderResult got = draw(moved);
  auto rep = deterministic_critic(want.image, got.image, DiffCriticOptions{}, got.boxes);
  REQUIRE(rep.ok());
  CHECK(rep->hallucination_detected);
  REQUIRE_FALSE(rep->issues.empty());
  bool right = false, left = false;
  for (const auto& issue : rep->issues) {
    CHECK(issue.category == IssueCategory::SpatialConflict);
    CHECK(issue.description.rfind("region row ", 0) == 0);
    for (const auto& id : issue.target_ids) {
      right = right || id == "right";
      left = left || id == "left";
    }
  }
  CHECK(right);
  CHECK_FALSE(left);
}

TEST_CASE("differences under the threshold are ignored") {
  RenderResult a = draw(kChart);
  std::string tinted = kChart;
  tinted.replace(tinted.find("#1377EB"), 7, "#1477EB");  // one channel off by one
  RenderResult b = draw(tinted);
  CHECK(deterministic_critic(a.image, b.image, DiffCriticOptions{0.01, 16, 4})->issues.empty());
  DiffCriticOptions strict{0.0, 0, 4};
  CHECK(deterministic_critic(a.image, b.image, strict)->hallucination_detected);
}

TEST_CASE("size mismatch is an error for the raw critic") {
  CHECK_FALSE(deterministic_critic(RasterImage(10, 10), RasterImage(10, 11), DiffCriticOptions{}).ok());
}

TEST_CASE("diff critic downsamples to the reference") {
  RenderResult r = draw(kChart);
  RasterImage half = downsample(r.image, r.image.width / 2, r.image.height / 2);
  DiffCritic critic;
  std::string task = "match";
  auto rep = critic.critique(CritiqueInput{task, &half, r});
  REQUIRE(rep.ok());
  CHECK_FALSE(rep->hallucination_detected);

  auto none = critic.critique(CritiqueInput{task, nullptr, r});
  REQUIRE(none.ok());
  CHECK(none.value() == CritiqueReport{});
}

TEST_CASE("report json round trip") {
  CritiqueReport rep{true,
                     {{IssueCategory::AttributeError, "fill is #b030b0", {"bar1", "bar2"}},
                      {IssueCategory::FalseExistence, "extra legend", {}}},
                     std::nullopt};
  std::string text = critique_to_json(rep);
  CHECK(text.find("\"hallucinationDetected\":true") != std::string::npos);
  auto back = critique_from_json(text);
  REQUIRE(back.ok());
  CHECK(back.value() == rep);
  CHECK_FALSE(critique_from_json("{\"issues\":[{\"category\":\"Vibes\"}]}").ok());
  CHECK(parse_issue_category("FalseExistence") == IssueCategory::FalseExistence);
}

TEST_CASE("model critic") {
  RenderResult r = draw(kChart);
  RasterImage ref = r.image;
  std::string task = "draw two bars";
  CritiqueInput input{task, &ref, r};

  auto msgs = LlmCritic::messages(input);
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].role == "system");
  CHECK(msgs[1].images.size() == 2);
  CHECK(msgs[1].text.find("draw two bars") != std::string::npos);
  CHECK(msgs[1].text.find("right") != std::string::npos);

  CannedBackend fenced(std::string(
      "Here you go:\n```json\n{\"hallucinationDetected\": true, \"issues\": [{\"category\": \"AttributeError\", "
      "\"description\": \"wrong blue\", \"targetIds\": [\"left\"]}]}\n```"));
  LlmCritic critic(fenced);
  auto rep = critic.critique(input);
  REQUIRE(rep.ok());
  CHECK(rep->hallucination_detected);
  REQUIRE(rep->issues.size() == 1);
  CHECK(rep->issues[0].target_ids == std::vector<std::string>{"left"});

  CannedBackend prose(std::string("Looks fine to me."));
  LlmCritic loose(prose);
  auto raw = loose.critique(input);
  REQUIRE(raw.ok());
  CHECK_FALSE(raw->hallucination_detected);
  CHECK(raw->raw_text == std::optional<std::string>("Looks fine to me."));

  CannedBackend down(SolverError{"timeout"});
  LlmCritic broken(down);
  auto err = broken.critique(input);
  REQUIRE_FALSE(err.ok());
  CHECK(err.error().message.find("timeout") != std::string::npos);
}
