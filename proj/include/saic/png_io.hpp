#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "saic/raster.hpp"

namespace saic::png {

// PNG codec over libpng's simplified API. Gray and RGB are preserved;
// alpha channels are dropped on read.
std::vector<std::uint8_t> encode(const Raster& image);
Raster decode(std::span<const std::uint8_t> bytes);

Raster read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Raster& image);

struct Header {
  int width = 0;
  int height = 0;
};
Header read_header(const std::filesystem::path& path);

}  // namespace saic::png
