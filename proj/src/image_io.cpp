#include "canvascot/image_io.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "canvascot/digest.hpp"

namespace canvascot {

std::string encode_png(const RasterImage& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGBA;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    return {};
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    return {};
  }
  out.resize(size);
  return out;
}

Result<RasterImage, std::string> decode_png(std::string_view bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    std::string msg = img.message;
    png_image_free(&img);
    return "PNG decode failed: " + msg;
  }
  img.format = PNG_FORMAT_RGBA;
  RasterImage out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    return "PNG decode failed: " + msg;
  }
  return out;
}

std::string image_digest(const RasterImage& image) { return sha256_hex(encode_png(image)); }

Result<std::string, IoError> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return IoError{"cannot open " + path.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return IoError{"cannot read " + path.string()};
  return ss.str();
}

std::optional<std::string> write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return "cannot open " + path.string() + " for writing";
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) return "cannot write " + path.string();
  return std::nullopt;
}

}  // namespace canvascot
