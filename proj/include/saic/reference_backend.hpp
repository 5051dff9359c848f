#pragma once

#include "saic/backends.hpp"

namespace saic::backends {

inline constexpr int kReferenceFeather = 2;
inline constexpr double kReferenceDetailGain = 0.2;
inline constexpr int kReferenceEmbeddingBins = 16;

// Deterministic stand-ins for the neural services. Pure functions of their inputs.

/// Ellipse inscribed in the bbox.
class ReferenceSegmentation final : public SegmentationBackend {
 protected:
  Raster do_segment(const Raster& image, const Bbox& bbox) override;
};

/// Global: L2-normalized 3x16-bin color histogram, zero-padded or truncated
/// to dim. Tokens: the four quadrant histograms.
class ReferenceEmbedding final : public EmbeddingBackend {
 public:
  explicit ReferenceEmbedding(int dim = kDefaultEmbeddingDim) : EmbeddingBackend(dim) {}

 protected:
  EmbeddingBundle do_embed(const Raster& image, const Raster* mask) override;
};

/// Feathered paste of the candidate (feather 2), plus 0.2 x the conditioning
/// detail (conditioning minus its 3x3 box blur) inside the shape mask.
class ReferenceGeneration final : public GenerationBackend {
 protected:
  Raster do_generate(const GenerationRequest& request) override;
};

/// Prefers the image with the lower mean luminance gradient along the seam
/// between the regions where the two images differ. Identical images tie to A.
class ReferenceJudge final : public JudgeBackend {
 protected:
  std::string do_judge(const Raster& image_a, const Raster& image_b, const std::string& prompt) override;
};

/// Mean Sobel luminance magnitude over the seam ring of `differs`.
double seam_gradient(const Raster& image, const std::vector<bool>& differs);

BackendSet make_reference_backends(int embedding_dim = kDefaultEmbeddingDim);

}  // namespace saic::backends
