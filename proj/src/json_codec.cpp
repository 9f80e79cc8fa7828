#include "json_codec.hpp"

namespace canvascot {

std::string_view to_string(IssueCategory category) {
  switch (category) {
    case IssueCategory::AttributeError: return "AttributeError";
    case IssueCategory::FalseExistence: return "FalseExistence";
    case IssueCategory::SpatialConflict: return "SpatialConflict";
  }
  return "SpatialConflict";
}

std::optional<IssueCategory> parse_issue_category(std::string_view name) {
  if (name == "AttributeError") return IssueCategory::AttributeError;
  if (name == "FalseExistence") return IssueCategory::FalseExistence;
  if (name == "SpatialConflict") return IssueCategory::SpatialConflict;
  return std::nullopt;
}

std::string critique_to_json(const CritiqueReport& report) { return codec::dump(codec::to_json(report)); }

Result<CritiqueReport, std::string> critique_from_json(std::string_view text) {
  auto j = codec::json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) return std::string("critique is not valid JSON");
  return codec::critique_from(j);
}

namespace codec {

json to_json(const CritiqueReport& report) {
  json j;
  j["hallucinationDetected"] = report.hallucination_detected;
  json issues = json::array();
  for (const auto& issue : report.issues) {
    issues.push_back({{"category", std::string(to_string(issue.category))},
                      {"description", issue.description},
                      {"targetIds", issue.target_ids}});
  }
  j["issues"] = std::move(issues);
  if (report.raw_text) j["rawText"] = *report.raw_text;
  return j;
}

Result<CritiqueReport, std::string> critique_from(const json& j) {
  if (!j.is_object()) return std::string("critique must be an object");
  CritiqueReport r;
  auto hd = j.find("hallucinationDetected");
  if (hd == j.end() || !hd->is_boolean()) return std::string("critique needs boolean hallucinationDetected");
  r.hallucination_detected = hd->get<bool>();
  if (auto it = j.find("issues"); it != j.end()) {
    if (!it->is_array()) return std::string("critique issues must be an array");
    for (const auto& item : *it) {
      if (!item.is_object()) return std::string("critique issue must be an object");
      CritiqueIssue issue;
      auto cat = item.find("category");
      if (cat == item.end() || !cat->is_string()) return std::string("critique issue needs a category");
      auto parsed = parse_issue_category(cat->get<std::string>());
      if (!parsed) return "unknown critique category " + cat->get<std::string>();
      issue.category = *parsed;
      if (auto d = item.find("description"); d != item.end() && d->is_string()) issue.description = d->get<std::string>();
      if (auto t = item.find("targetIds"); t != item.end() && t->is_array()) {
        for (const auto& id : *t) {
          if (id.is_string()) issue.target_ids.push_back(id.get<std::string>());
        }
      }
      r.issues.push_back(std::move(issue));
    }
  }
  if (auto raw = j.find("rawText"); raw != j.end() && raw->is_string()) r.raw_text = raw->get<std::string>();
  return r;
}

json to_json(const Turn& turn) {
  json j;
  j["thoughts"] = turn.thoughts;
  j["toolCalls"] = turn.tool_calls;
  j["answer"] = turn.answer ? json(*turn.answer) : json(nullptr);
  if (turn.answer_regions > 1) j["answerRegions"] = turn.answer_regions;
  return j;
}

Turn turn_from(const json& j) {
  Turn t;
  if (!j.is_object()) return t;
  if (auto it = j.find("thoughts"); it != j.end() && it->is_array()) {
    for (const auto& s : *it) t.thoughts.push_back(s.get<std::string>());
  }
  if (auto it = j.find("toolCalls"); it != j.end() && it->is_array()) {
    for (const auto& s : *it) t.tool_calls.push_back(s.get<std::string>());
  }
  if (auto it = j.find("answer"); it != j.end() && it->is_string()) {
    t.answer = it->get<std::string>();
    t.answer_regions = 1;
  }
  if (auto it = j.find("answerRegions"); it != j.end() && it->is_number_unsigned()) {
    t.answer_regions = it->get<std::size_t>();
  }
  return t;
}

json to_json(const TokenCount& count) {
  return {{"count", count.count}, {"method", std::string(to_string(count.method))}};
}

TokenCount token_count_from(const json& j) {
  TokenCount c;
  if (!j.is_object()) return c;
  if (auto it = j.find("count"); it != j.end() && it->is_number_unsigned()) c.count = it->get<std::size_t>();
  if (auto it = j.find("method"); it != j.end() && it->is_string()) {
    c.method = parse_token_method(it->get<std::string>()).value_or(TokenMethod::WordPunct);
  }
  return c;
}

json action_to_json(const Action& action) { return json::parse(encode_tool_call(action)); }

Result<Action, std::string> action_from(const json& j) {
  auto a = decode_tool_call(dump(j));
  if (!a) return a.error().describe();
  return a.value();
}

}  // namespace codec
}  // namespace canvascot
