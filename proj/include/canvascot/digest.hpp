#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace canvascot {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

std::string base64_encode(std::string_view bytes);

/// Standard alphabet with padding; nothing on malformed input.
std::optional<std::string> base64_decode(std::string_view text);

}  // namespace canvascot
