#include "saic/raster.hpp"

#include <algorithm>
#include <string>

#include "saic/types.hpp"

namespace saic {

namespace {

void check_dims(int w, int h, int c) {
  if (w < 0 || h < 0) throw Error(Errc::InvalidArgument, "negative raster size");
  if (c != 1 && c != 3) throw Error(Errc::InvalidArgument, "channels must be 1 or 3, got " + std::to_string(c));
}

}  // namespace

Raster::Raster(int w, int h, int c, std::uint8_t fill) : width(w), height(h), channels(c) {
  check_dims(w, h, c);
  data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill);
}

HFMap::HFMap(int w, int h, int c, double fill) : width(w), height(h), channels(c) {
  check_dims(w, h, c);
  data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill);
}

Raster crop(const Raster& image, const Bbox& box) {
  if (!box.inside(image.width, image.height)) {
    throw Error(Errc::RegionOutOfBounds, "crop window outside image");
  }
  Raster out(box.w, box.h, image.channels);
  const auto row_bytes = static_cast<std::size_t>(box.w) * static_cast<std::size_t>(image.channels);
  for (int y = 0; y < box.h; ++y) {
    const auto* src = image.data.data() + image.index(box.x, box.y + y);
    std::copy(src, src + row_bytes, out.data.data() + out.index(0, y));
  }
  return out;
}

std::int64_t mask_area(const Raster& mask) {
  return std::count_if(mask.data.begin(), mask.data.end(), [](std::uint8_t v) { return v > 127; });
}

Raster to_rgb(const Raster& image) {
  if (image.channels == 3) return image;
  Raster out(image.width, image.height, 3);
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = image.data[i];
  }
  return out;
}

std::string to_string(CellType type) { return type == CellType::clumps ? "clumps" : "single_cell"; }

CellType cell_type_from_string(const std::string& text) {
  if (text == "single_cell" || text == "cell") return CellType::single_cell;
  if (text == "clumps" || text == "clump") return CellType::clumps;
  throw Error(Errc::SchemaError, "unknown cell_type '" + text + "'");
}

}  // namespace saic
