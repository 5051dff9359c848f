#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "saic/backends.hpp"
#include "saic/cellbank.hpp"
#include "saic/imageproc.hpp"

namespace saic::composer {

struct CompositionPair {
  std::string region_id;
  Region region;
  std::int64_t candidate_id = 0;
  std::int64_t reference_id = 0;
  Raster self_image;
  Raster background_image;
  std::uint64_t seed = 0;
  std::map<std::string, double> timings;  // seconds
};

struct StyleInput {
  Raster conditioning;
  Raster shape_mask;  // bbox-sized
};

struct StyleInputs {
  StyleInput self_style;
  StyleInput background_style;
};

/// Center-aligned, mask-isolated candidate through the embedder; the global
/// vector stands in when the backend returns no tokens.
backends::TokenSequence extract_id_map(const cellbank::CellRecord& candidate, backends::EmbeddingBackend& embedder);

/// Ht from the candidate crop, Hr from the reference crop resampled to the
/// candidate size, both stitched (after resampling to the bbox) under the
/// candidate mask resampled to the bbox.
StyleInputs prepare_style_inputs(const cellbank::CellRecord& candidate, const cellbank::CellRecord& reference,
                                 const Raster& background, const Region& region, double alpha,
                                 imageproc::HighPassKind kind = imageproc::HighPassKind::sobel);

struct ComposeOptions {
  double alpha = imageproc::kDefaultAlpha;
  imageproc::HighPassKind highpass = imageproc::HighPassKind::sobel;
};

/// Two generate calls (self_style, background_style) sharing seed and ID tokens.
CompositionPair compose_pair(const std::string& region_id, const Raster& background, const Region& region,
                             const cellbank::CellRecord& candidate, const cellbank::CellRecord& reference,
                             backends::GenerationBackend& generator, backends::EmbeddingBackend& embedder,
                             std::uint64_t seed, const ComposeOptions& options = {});

}  // namespace saic::composer
