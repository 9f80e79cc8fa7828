#pragma once

// nlohmann conversions shared by the trajectory, cassette and critic code.

#include "canvascot/critique.hpp"
#include "canvascot/protocol.hpp"
#include "json.hpp"

namespace canvascot::codec {

using json = nlohmann::ordered_json;

json to_json(const CritiqueReport& report);
Result<CritiqueReport, std::string> critique_from(const json& j);

json to_json(const Turn& turn);
Turn turn_from(const json& j);

json to_json(const TokenCount& count);
TokenCount token_count_from(const json& j);

json action_to_json(const Action& action);
Result<Action, std::string> action_from(const json& j);

}  // namespace canvascot::codec

namespace canvascot::codec {

/// Compact dump that never throws on invalid UTF-8 (bytes are replaced).
inline std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace canvascot::codec
