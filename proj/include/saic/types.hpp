#pragma once

#include <cstdint>
#include <string>

#include "saic/raster.hpp"

namespace saic {

enum class CellType { single_cell, clumps };

std::string to_string(CellType type);
CellType cell_type_from_string(const std::string& text);

// A placement target inside a background image. shape_mask is bbox-sized.
struct Region {
  Bbox bbox;
  Raster shape_mask;
  std::string orig_category;
  CellType orig_type = CellType::single_cell;
  std::int64_t orig_area = 0;
};

}  // namespace saic

