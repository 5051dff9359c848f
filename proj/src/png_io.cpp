#include "saic/png_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <png.h>

#include "saic/util.hpp"

namespace saic::png {

std::vector<std::uint8_t> encode(const Raster& image) {
  if (image.empty()) throw Error(Errc::EmptyImage, "cannot encode an empty raster");
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(img, size, 0, image.data.data(), 0, nullptr)) {
    throw Error(Errc::IoError, std::string("png size query failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.data.data(), 0, nullptr)) {
    throw Error(Errc::IoError, std::string("png encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

Raster decode(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(Errc::MalformedResponse, std::string("png decode failed: ") + img.message);
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Raster out(static_cast<int>(img.width), static_cast<int>(img.height), color ? 3 : 1);
  if (!png_image_finish_read(&img, nullptr, out.data.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(Errc::MalformedResponse, std::string("png decode failed: ") + img.message);
  }
  return out;
}

Raster read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const Error& e) {
    throw Error(Errc::IoError, path.string() + ": " + e.what());
  }
}

void write(const std::filesystem::path& path, const Raster& image) {
  const auto bytes = encode(image);
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Header read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open image " + path.string());
  std::uint8_t buf[24] = {};
  in.read(reinterpret_cast<char*>(buf), sizeof(buf));
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (in.gcount() < 24 || std::memcmp(buf, kSig, 8) != 0 || std::memcmp(buf + 12, "IHDR", 4) != 0) {
    throw Error(Errc::IoError, "not a PNG file: " + path.string());
  }
  auto be32 = [&](int off) {
    return static_cast<int>((std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) |
                            (std::uint32_t{buf[off + 2]} << 8) | std::uint32_t{buf[off + 3]});
  };
  return {be32(16), be32(20)};
}

}  // namespace saic::png
