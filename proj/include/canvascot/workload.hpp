#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "canvascot/protocol.hpp"

namespace canvascot {

// Synthetic documents for token accounting: an svg (id "doc") holding n
// rects e0..e{n-1} laid out on a grid inside the canvas.

std::string synthetic_document(int n, std::string_view odd_fill = "#1377EB");

struct CorrectionCost {
  int n = 0;
  std::size_t regeneration = 0;  ///< tokens of a replace_element call carrying the whole corrected svg
  std::size_t modify = 0;        ///< tokens of one modify_element call fixing the element
  double ratio() const { return modify ? double(regeneration) / double(modify) : 0.0; }
};

/// Cost of fixing the fill of the last element of synthetic_document(n).
CorrectionCost correction_cost(int n, TokenMethod method = TokenMethod::WordPunct);

/// Scripted solver responses for the convergence workload: one large
/// insert, then shrinking modify turns, then a short answer.
std::vector<std::string> convergence_script(int n, int correction_turns);

}  // namespace canvascot
