#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "saic/raster.hpp"

namespace saic::backends {

using Vector = std::vector<double>;
using TokenSequence = std::vector<Vector>;

inline constexpr int kDefaultEmbeddingDim = 768;

struct EmbeddingBundle {
  Vector global;
  std::optional<TokenSequence> tokens;
};

enum class Variant { self_style, background_style };
std::string to_string(Variant v);
Variant variant_from_string(const std::string& text);

struct GenerationRequest {
  Raster background;
  Raster conditioning;
  Raster shape_mask;  // bbox-sized
  Bbox bbox;
  TokenSequence id_tokens;
  std::uint64_t seed = 0;
  Variant variant = Variant::self_style;
  // Candidate crop resampled to the bbox. Live servers may ignore it; the
  // reference generator pastes it.
  std::optional<Raster> candidate;
};

enum class Choice { A, B };

struct VlmVerdict {
  Choice choice = Choice::A;
  std::string rationale;
  std::string raw;
};

/// Reads the first line matching "Choice: A|B" (case-insensitive) and an
/// optional "Reason:" line. Throws UnparseableVerdict.
VlmVerdict parse_verdict(const std::string& text);

// Each interface validates inputs and outputs around the virtual hook, so
// every implementation (reference or remote) is held to the same contract.

class SegmentationBackend {
 public:
  virtual ~SegmentationBackend() = default;
  /// bbox-sized single-channel mask with at least one positive pixel.
  Raster segment(const Raster& image, const Bbox& bbox);

 protected:
  virtual Raster do_segment(const Raster& image, const Bbox& bbox) = 0;
};

class EmbeddingBackend {
 public:
  explicit EmbeddingBackend(int dim) : dim_(dim) {}
  virtual ~EmbeddingBackend() = default;
  EmbeddingBundle embed(const Raster& image, const Raster* mask = nullptr);
  int dim() const { return dim_; }

 protected:
  virtual EmbeddingBundle do_embed(const Raster& image, const Raster* mask) = 0;

 private:
  int dim_;
};

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  Raster generate(const GenerationRequest& request);

 protected:
  virtual Raster do_generate(const GenerationRequest& request) = 0;
};

class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  VlmVerdict judge(const Raster& image_a, const Raster& image_b, const std::string& prompt);

 protected:
  /// Raw response text; parsing happens in judge().
  virtual std::string do_judge(const Raster& image_a, const Raster& image_b, const std::string& prompt) = 0;
};

struct BackendSet {
  std::shared_ptr<SegmentationBackend> segmentation;
  std::shared_ptr<EmbeddingBackend> embedding;
  std::shared_ptr<GenerationBackend> generation;
  std::shared_ptr<JudgeBackend> judge;
  std::string description;  // recorded in reports, e.g. "reference"
};

void validate_embedding(const EmbeddingBundle& bundle, int expected_dim);

}  // namespace saic::backends
