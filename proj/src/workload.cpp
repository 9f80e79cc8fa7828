#include "canvascot/workload.hpp"

#include <algorithm>

#include "canvascot/dom.hpp"

namespace canvascot {
namespace {

// Grid cell placement; fits 500px for any n.
std::string rect_markup(int i, int n, std::string_view fill) {
  int cols = std::max(1, std::min(n, 25));
  int rows = (n + cols - 1) / cols;
  double cw = 480.0 / cols, ch = std::min(20.0, 600.0 / std::max(rows, 1));
  int r = i / cols, c = i % cols;
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
  };
  return "<rect id=\"e" + std::to_string(i) + "\" x=\"" + num(10 + c * cw) + "\" y=\"" + num(10 + r * ch) +
         "\" width=\"" + num(cw * 0.8) + "\" height=\"" + num(ch * 0.8) + "\" fill=\"" + std::string(fill) + "\"/>";
}

std::string document(int n, int odd_index, std::string_view odd_fill) {
  int cols = std::max(1, std::min(n, 25));
  int rows = (n + cols - 1) / cols;
  double ch = std::min(20.0, 600.0 / std::max(rows, 1));
  int height = static_cast<int>(20 + rows * ch);
  std::string out = "<svg id=\"doc\" width=\"500\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 500 " +
                    std::to_string(height) + "\">";
  for (int i = 0; i < n; ++i) {
    out += "\n  ";
    out += rect_markup(i, n, i == odd_index ? odd_fill : std::string_view("#009E5F"));
  }
  out += "\n</svg>";
  return out;
}

std::string wrap_call(const Action& a) { return "<tool_call>" + encode_tool_call(a) + "</tool_call>"; }

}  // namespace

std::string synthetic_document(int n, std::string_view odd_fill) { return document(n, n - 1, odd_fill); }

CorrectionCost correction_cost(int n, TokenMethod method) {
  CorrectionCost cost;
  cost.n = n;
  std::string fixed = document(n, -1, "");
  cost.regeneration = count_tokens(wrap_call(ReplaceAction{"doc", fixed}), method).count;
  ModifyAction fix{"e" + std::to_string(n - 1), {{"fill", std::string("#009E5F")}}};
  cost.modify = count_tokens(wrap_call(fix), method).count;
  return cost;
}

std::vector<std::string> convergence_script(int n, int correction_turns) {
  std::vector<std::string> out;
  out.push_back("<think>Lay out all " + std::to_string(n) + " cells first, then fix colors one at a time.</think>" +
                wrap_call(InsertAction{synthetic_document(n, "#ED2633"), std::string(kRootId), std::nullopt}));
  for (int k = 0; k < correction_turns; ++k) {
    // Thoughts shrink as the notebook converges.
    std::string think = "<think>";
    for (int w = correction_turns - k; w > 0; --w) think += "check ";
    think += "</think>";
    std::string fill = k + 1 == correction_turns ? "#009E5F" : "#ED2633";
    out.push_back(think + wrap_call(ModifyAction{"e" + std::to_string(n - 1), {{"fill", fill}}}));
  }
  out.push_back("<answer>done</answer>");
  return out;
}

}  // namespace canvascot
