#include "saic/composer.hpp"

#include <chrono>
#include <string_view>

namespace saic::composer {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Re-raises a backend error with the variant it came from.
[[noreturn]] void rethrow_tagged(const Error& e, backends::Variant variant) {
  std::string_view message = e.what();
  const auto name = errc_name(e.code());
  if (message.substr(0, name.size()) == name) message.remove_prefix(std::min(message.size(), name.size() + 2));
  throw Error(e.code(), to_string(variant) + ": " + std::string(message));
}

StyleInput stitch_variant(const HFMap& hf, const Raster& background, const Region& region) {
  const HFMap resized = imageproc::resize_bilinear(hf, region.bbox.w, region.bbox.h);
  return {imageproc::stitch(background, resized, region), region.shape_mask};
}

}  // namespace

backends::TokenSequence extract_id_map(const cellbank::CellRecord& candidate, backends::EmbeddingBackend& embedder) {
  if (mask_area(candidate.mask) == 0) throw Error(Errc::EmptyMask, "candidate " + std::to_string(candidate.id) + " has an empty mask");
  const auto [aligned, aligned_mask] = cellbank::cell_canvas(candidate.crop, candidate.mask);
  auto bundle = embedder.embed(aligned, &aligned_mask);
  if (bundle.tokens && !bundle.tokens->empty()) return std::move(*bundle.tokens);
  return {std::move(bundle.global)};
}

StyleInputs prepare_style_inputs(const cellbank::CellRecord& candidate, const cellbank::CellRecord& reference,
                                 const Raster& background, const Region& region, double alpha,
                                 imageproc::HighPassKind kind) {
  if (!region.bbox.inside(background.width, background.height)) {
    throw Error(Errc::RegionOutOfBounds, "region bbox lies outside the background");
  }
  const HFMap ht = imageproc::highpass(candidate.crop, kind);
  const Raster ref = imageproc::resize_bilinear(reference.crop, candidate.crop.width, candidate.crop.height);
  const HFMap hr = imageproc::highpass(ref, kind);
  if (!ht.same_shape(hr)) throw Error(Errc::DimensionMismatch, "candidate and reference channel counts differ");

  Region target = region;
  target.shape_mask = imageproc::resize_nearest(candidate.mask, region.bbox.w, region.bbox.h);
  return {stitch_variant(ht, background, target), stitch_variant(imageproc::blend_hf(ht, hr, alpha), background, target)};
}

CompositionPair compose_pair(const std::string& region_id, const Raster& background, const Region& region,
                             const cellbank::CellRecord& candidate, const cellbank::CellRecord& reference,
                             backends::GenerationBackend& generator, backends::EmbeddingBackend& embedder,
                             std::uint64_t seed, const ComposeOptions& options) {
  CompositionPair pair;
  pair.region_id = region_id;
  pair.region = region;
  pair.candidate_id = candidate.id;
  pair.reference_id = reference.id;
  pair.seed = seed;

  auto start = Clock::now();
  const auto tokens = extract_id_map(candidate, embedder);
  const auto inputs = prepare_style_inputs(candidate, reference, background, region, options.alpha, options.highpass);
  pair.timings["prepare"] = seconds_since(start);

  const Raster pasted = imageproc::resize_bilinear(candidate.crop, region.bbox.w, region.bbox.h);
  auto run = [&](const StyleInput& input, backends::Variant variant) {
    backends::GenerationRequest request;
    request.background = background;
    request.conditioning = input.conditioning;
    request.shape_mask = input.shape_mask;
    request.bbox = region.bbox;
    request.id_tokens = tokens;
    request.seed = seed;
    request.variant = variant;
    request.candidate = pasted;
    try {
      return generator.generate(request);
    } catch (const Error& e) {
      rethrow_tagged(e, variant);
    }
  };
  start = Clock::now();
  pair.self_image = run(inputs.self_style, backends::Variant::self_style);
  pair.background_image = run(inputs.background_style, backends::Variant::background_style);
  pair.timings["generate"] = seconds_since(start);
  return pair;
}

}  // namespace saic::composer
