#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "saic/raster.hpp"
#include "saic/types.hpp"
#include "saic/util.hpp"

namespace saic::cellbank {
class CellBank;
struct SelectionQuery;
}  // namespace saic::cellbank

namespace saic::dataio {

inline constexpr const char* kDatasetSchema = "saic-dataset/1";
inline constexpr const char* kPlanSchema = "saic-plan/1";

/// The eleven abnormal-cell categories of the cervical detection database.
const std::vector<std::string>& default_categories();

struct ImageEntry {
  std::string id;
  std::string path;  // relative to Dataset::root unless absolute
  int width = 0;
  int height = 0;

  bool operator==(const ImageEntry&) const = default;
};

// Polygons in image pixel coordinates, each ring as x0,y0,x1,y1,...
struct PolygonMask {
  std::vector<std::vector<double>> rings;
  bool operator==(const PolygonMask&) const = default;
};

// Uncompressed COCO run-length encoding over the whole image, column-major.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;
  bool operator==(const RleMask&) const = default;
};

using MaskShape = std::variant<std::monostate, PolygonMask, RleMask>;

struct Annotation {
  std::string image_id;
  Bbox bbox;
  std::string category;
  CellType cell_type = CellType::single_cell;
  MaskShape mask;
  std::int64_t area = 0;

  bool has_mask() const { return !std::holds_alternative<std::monostate>(mask); }
  bool operator==(const Annotation&) const = default;
};

struct Dataset {
  std::filesystem::path root;
  std::vector<std::string> categories;
  std::vector<ImageEntry> images;
  std::vector<Annotation> annotations;

  const ImageEntry* find_image(const std::string& id) const;
  std::filesystem::path image_path(const ImageEntry& image) const;
  /// Throws SchemaError on a dangling image id, out-of-bounds bbox or non-positive area.
  void validate() const;
};

enum class Format { canonical_json, coco_json, yolo_txt };
Format format_from_string(const std::string& text);
std::string to_string(Format format);

struct ImportOptions {
  /// Vocabulary that COCO/YOLO category names must belong to.
  std::vector<std::string> known_categories = default_categories();
  /// Optional rename applied before the vocabulary check; when present it
  /// replaces the vocabulary check for mapped names.
  std::optional<std::map<std::string, std::string>> category_map;
};

Dataset import_dataset(const std::filesystem::path& path, Format format, const ImportOptions& options = {});
void export_dataset(const Dataset& dataset, Format format, const std::filesystem::path& path);

json to_canonical_json(const Dataset& dataset);
Dataset from_canonical_json(const json& doc, const std::filesystem::path& root);

/// One YOLO label line: "class cx cy w h", normalized, six decimals.
std::string format_yolo_line(int class_index, const Bbox& box, int image_w, int image_h);
/// Inverse of format_yolo_line; returns class index and pixel bbox clamped to the image.
std::pair<int, Bbox> parse_yolo_line(const std::string& line, int image_w, int image_h);

/// Rasterizes an annotation's mask inside its bbox (bbox-sized, 0/255).
/// Returns an empty raster when the annotation has no mask.
Raster rasterize_mask(const Annotation& annotation);

RleMask decode_coco_rle_string(const std::string& counts, int height, int width);

/// Stratified subset: per category keeps round(ratio * n) annotations (at
/// least one), images survive iff they keep an annotation.
Dataset sample_subset(const Dataset& dataset, double ratio, std::uint64_t seed);

enum class Targeting { uniform, tail_weighted };
Targeting targeting_from_string(const std::string& text);
std::string to_string(Targeting targeting);

inline constexpr int kDefaultTailThreshold = 500;

struct PlanEntry {
  std::string region_id;
  std::string background_image_id;
  std::size_t annotation_index = 0;
  Bbox bbox;
  std::string category;
  CellType cell_type = CellType::single_cell;
  std::int64_t area = 0;

  bool operator==(const PlanEntry&) const = default;
};

struct AugmentationPlan {
  std::vector<PlanEntry> entries;
  std::uint64_t seed = 0;
  double expand_ratio = 0.0;
  Targeting targeting = Targeting::tail_weighted;
  int tail_threshold = kDefaultTailThreshold;

  bool operator==(const AugmentationPlan&) const = default;
};

/// ceil(expand_ratio * |images|) entries; each reuses an existing annotated
/// region whose (category, type) bucket exists in the bank.
AugmentationPlan plan_augmentation(const Dataset& dataset, const cellbank::CellBank& bank, double expand_ratio,
                                   Targeting targeting, int tail_threshold, std::uint64_t seed);

json plan_to_json(const AugmentationPlan& plan);
AugmentationPlan plan_from_json(const json& doc);

/// Number of plan entries for a ratio; tolerant to representation error so
/// that ratio = k / n yields exactly k.
std::size_t planned_entry_count(double expand_ratio, std::size_t image_count);

}  // namespace saic::dataio
