#include "saic/backends.hpp"

#include <cmath>
#include <regex>
#include <sstream>
#include <string>

namespace saic::backends {

std::string to_string(Variant v) { return v == Variant::self_style ? "self_style" : "background_style"; }

Variant variant_from_string(const std::string& text) {
  if (text == "self_style") return Variant::self_style;
  if (text == "background_style") return Variant::background_style;
  throw Error(Errc::MalformedResponse, "unknown variant '" + text + "'");
}

VlmVerdict parse_verdict(const std::string& text) {
  static const std::regex kChoice(R"(^\s*\**\s*choice\s*\**\s*:\s*\**\s*([ab])\b)", std::regex::icase);
  static const std::regex kReason(R"(^\s*\**\s*reason\s*\**\s*:\s*(.*)$)", std::regex::icase);
  std::optional<Choice> choice;
  std::string reason;
  std::string rest;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (!choice && std::regex_search(line, m, kChoice)) {
      const char c = m[1].str()[0];
      choice = (c == 'a' || c == 'A') ? Choice::A : Choice::B;
    } else if (reason.empty() && std::regex_search(line, m, kReason)) {
      reason = m[1].str();
    } else if (!line.empty()) {
      if (!rest.empty()) rest += '\n';
      rest += line;
    }
  }
  if (!choice) throw Error(Errc::UnparseableVerdict, "no 'Choice: A|B' line in response");
  return {*choice, reason.empty() ? rest : reason, text};
}

Raster SegmentationBackend::segment(const Raster& image, const Bbox& bbox) {
  if (image.empty()) throw Error(Errc::EmptyImage, "segmentation of an empty image");
  if (!bbox.inside(image.width, image.height)) throw Error(Errc::RegionOutOfBounds, "segmentation bbox outside image");
  Raster mask = do_segment(image, bbox);
  if (mask.width != bbox.w || mask.height != bbox.h || mask.channels != 1) {
    throw Error(Errc::MalformedResponse, "segmentation mask does not match the requested bbox");
  }
  if (mask_area(mask) == 0) throw Error(Errc::MalformedResponse, "segmentation mask is empty");
  return mask;
}

void validate_embedding(const EmbeddingBundle& bundle, int expected_dim) {
  if (bundle.global.empty()) throw Error(Errc::MalformedResponse, "empty global embedding");
  if (expected_dim > 0 && static_cast<int>(bundle.global.size()) != expected_dim) {
    throw Error(Errc::MalformedResponse, "global embedding has length " + std::to_string(bundle.global.size()) +
                                             ", expected " + std::to_string(expected_dim));
  }
  double sq = 0.0;
  for (double v : bundle.global) {
    if (!std::isfinite(v)) throw Error(Errc::MalformedResponse, "non-finite embedding value");
    sq += v * v;
  }
  if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
    throw Error(Errc::MalformedResponse, "global embedding norm " + std::to_string(std::sqrt(sq)) + " is not 1");
  }
  if (bundle.tokens && !bundle.tokens->empty()) {
    const auto len = bundle.tokens->front().size();
    for (const auto& t : *bundle.tokens) {
      if (t.size() != len) throw Error(Errc::MalformedResponse, "token vectors differ in length");
      for (double v : t) {
        if (!std::isfinite(v)) throw Error(Errc::MalformedResponse, "non-finite token value");
      }
    }
  }
}

EmbeddingBundle EmbeddingBackend::embed(const Raster& image, const Raster* mask) {
  if (image.empty()) throw Error(Errc::EmptyImage, "embedding of an empty image");
  if (mask && (mask->width != image.width || mask->height != image.height || mask->channels != 1)) {
    throw Error(Errc::DimensionMismatch, "embedding mask does not match image");
  }
  EmbeddingBundle bundle = do_embed(image, mask);
  validate_embedding(bundle, dim_);
  return bundle;
}

Raster GenerationBackend::generate(const GenerationRequest& request) {
  const auto& bg = request.background;
  if (bg.empty()) throw Error(Errc::EmptyImage, "generation without a background");
  if (!bg.same_shape(request.conditioning)) {
    throw Error(Errc::DimensionMismatch, "conditioning must match the background");
  }
  if (!request.bbox.inside(bg.width, bg.height)) throw Error(Errc::RegionOutOfBounds, "generation bbox outside image");
  if (request.shape_mask.width != request.bbox.w || request.shape_mask.height != request.bbox.h ||
      request.shape_mask.channels != 1) {
    throw Error(Errc::DimensionMismatch, "shape mask must match the region size");
  }
  Raster out = do_generate(request);
  if (out.width != bg.width || out.height != bg.height) {
    throw Error(Errc::MalformedResponse, "generated image size differs from background");
  }
  if (out.channels != bg.channels) out = to_rgb(out);
  return out;
}

VlmVerdict JudgeBackend::judge(const Raster& image_a, const Raster& image_b, const std::string& prompt) {
  if (image_a.width != image_b.width || image_a.height != image_b.height) {
    throw Error(Errc::DimensionMismatch, "judged images differ in size");
  }
  return parse_verdict(do_judge(image_a, image_b, prompt));
}

}  // namespace saic::backends
