#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "saic/error.hpp"

namespace saic {

struct Bbox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const Bbox&) const = default;

  bool inside(int width, int height) const {
    return w > 0 && h > 0 && x >= 0 && y >= 0 && x + w <= width && y + h <= height;
  }
  bool contains(int px, int py) const { return px >= x && py >= y && px < x + w && py < y + h; }
};

// 8-bit raster, row-major, channel-interleaved. channels is 1 or 3.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  Raster() = default;
  Raster(int w, int h, int c, std::uint8_t fill = 0);

  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels) +
           static_cast<std::size_t>(c);
  }
  std::uint8_t at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }

  bool same_shape(const Raster& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
  bool operator==(const Raster&) const = default;
};

// Real-valued detail map aligned to a raster (values may be negative).
struct HFMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  HFMap() = default;
  HFMap(int w, int h, int c, double fill = 0.0);

  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels) +
           static_cast<std::size_t>(c);
  }
  double at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }
  double& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }

  bool same_shape(const HFMap& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// Copies the bbox window out of an image.
Raster crop(const Raster& image, const Bbox& box);

/// Number of mask samples above 127.
std::int64_t mask_area(const Raster& mask);

/// Expands a single-channel raster to three channels; three-channel input is returned as-is.
Raster to_rgb(const Raster& image);

}  // namespace saic
