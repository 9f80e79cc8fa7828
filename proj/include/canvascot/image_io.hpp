#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "canvascot/render.hpp"
#include "canvascot/result.hpp"

namespace canvascot {

/// RGBA8 PNG with fixed encoder settings, so equal images give equal bytes.
std::string encode_png(const RasterImage& image);

/// Decodes any PNG libpng understands into RGBA8.
Result<RasterImage, std::string> decode_png(std::string_view bytes);

/// SHA-256 of the encoded PNG, lowercase hex.
std::string image_digest(const RasterImage& image);

struct IoError {
  std::string message;
};

Result<std::string, IoError> read_file(const std::filesystem::path& path);
std::optional<std::string> write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace canvascot
