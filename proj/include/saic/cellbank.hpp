#pragma once

#include <cstdint>
#include <functional>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "saic/backends.hpp"
#include "saic/raster.hpp"
#include "saic/types.hpp"
#include "saic/util.hpp"

namespace saic::dataio {
struct Dataset;
}

namespace saic::cellbank {

inline constexpr const char* kBankSchema = "saic-bank/1";

struct CellRecord {
  std::int64_t id = 0;
  std::string category;
  CellType cell_type = CellType::single_cell;
  std::int64_t area = 0;
  Raster crop;  // RGB
  Raster mask;  // single channel, same size as crop
  std::string source_image_id;
  Bbox source_bbox;
  std::optional<std::vector<double>> embedding;
};

/// Throws SchemaError when a record breaks the area, shape or unit-norm invariants.
void validate_record(const CellRecord& record);

using BucketKey = std::pair<std::string, CellType>;

// Immutable after construction; all queries are const and thread-safe.
class CellBank {
 public:
  CellBank() = default;
  explicit CellBank(std::vector<CellRecord> records);

  const std::vector<CellRecord>& records() const { return records_; }
  const std::map<BucketKey, std::vector<std::int64_t>>& index() const { return index_; }
  const CellRecord& get(std::int64_t id) const;
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  bool has_bucket(const std::string& category, CellType type) const;

 private:
  std::vector<CellRecord> records_;  // sorted by id
  std::map<BucketKey, std::vector<std::int64_t>> index_;  // area asc, then id asc
};

struct SelectionQuery {
  std::string category;
  CellType cell_type = CellType::single_cell;
  std::int64_t area = 1;
  std::optional<std::string> exclude_source;
};

/// argmin |area - query.area| within the (category, type) bucket, ties to
/// the lowest id. Throws NoMatch.
const CellRecord& select_candidate(const CellBank& bank, const SelectionQuery& query);

double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct ReferenceConstraint {
  std::optional<std::string> same_category;
  std::optional<std::string> exclude_source;
};

/// argmax cosine similarity to orig_embedding over the bank, ties to the lowest id.
const CellRecord& select_style_reference(const CellBank& bank, std::span<const double> orig_embedding,
                                         const ReferenceConstraint& constraint = {});

struct BankSamplingConfig {
  int count_min = 68;
  int count_max = 90;
  // When positive, per-category targets are availability-proportional shares
  // clamped into [count_min, count_max], scaled so they sum to this total.
  // Otherwise every category targets count_max.
  int total = 0;
  std::uint64_t seed = 0;
};

/// Per-category sample sizes; a function of category counts only, never of the seed.
std::map<std::string, int> bank_targets(const std::map<std::string, int>& available,
                                        const BankSamplingConfig& sampling);

using ImageLoader = std::function<Raster(const std::string& image_id)>;

/// Samples annotated regions per category and extracts their crops and masks.
/// Annotations without a mask go through `segmenter`; if it is null -> MissingMask.
/// When `embedder` is set, records carry embeddings of their isolated, center-aligned cell.
CellBank build_bank(const dataio::Dataset& dataset, const BankSamplingConfig& sampling, const ImageLoader& load_image,
                    backends::SegmentationBackend* segmenter = nullptr,
                    backends::EmbeddingBackend* embedder = nullptr);

/// Mask-isolated crop, center-aligned on a square canvas of the larger side.
std::pair<Raster, Raster> cell_canvas(const Raster& crop, const Raster& mask);

/// Embedding of a cell as used for style-reference similarity.
std::vector<double> cell_embedding(backends::EmbeddingBackend& embedder, const Raster& crop, const Raster& mask);

json bank_to_json(const CellBank& bank);
void save_bank(const CellBank& bank, const std::filesystem::path& dir);
CellBank load_bank(const std::filesystem::path& dir);

}  // namespace saic::cellbank
