#pragma once

#include <optional>
#include <string>

#include "saic/backends.hpp"
#include "saic/util.hpp"

// Wire codec for the v1 backend protocol: JSON bodies, rasters as base64 PNG.
namespace saic::protocol {

inline constexpr const char* kVersion = "v1";
inline constexpr const char* kSegmentPath = "/v1/segment";
inline constexpr const char* kEmbedPath = "/v1/embed";
inline constexpr const char* kComposePath = "/v1/compose";
inline constexpr const char* kJudgePath = "/v1/judge";

std::string encode_raster(const Raster& image);
Raster decode_raster(const json& value, const char* field);

struct SegmentRequest {
  Raster image;
  Bbox bbox;
};
json encode(const SegmentRequest& req);
SegmentRequest decode_segment_request(const json& body);
json encode_segment_response(const Raster& mask);
Raster decode_segment_response(const json& body);

struct EmbedRequest {
  Raster image;
  std::optional<Raster> mask;
  int dim = backends::kDefaultEmbeddingDim;
};
json encode(const EmbedRequest& req);
EmbedRequest decode_embed_request(const json& body);
json encode_embed_response(const backends::EmbeddingBundle& bundle);
backends::EmbeddingBundle decode_embed_response(const json& body);

json encode(const backends::GenerationRequest& req);
backends::GenerationRequest decode_compose_request(const json& body);
json encode_compose_response(const Raster& image);
Raster decode_compose_response(const json& body);

struct JudgeRequest {
  Raster image_a;
  Raster image_b;
  std::string prompt;
};
json encode(const JudgeRequest& req);
JudgeRequest decode_judge_request(const json& body);
json encode_judge_response(const std::string& text);
std::string decode_judge_response(const json& body);

json error_body(const std::string& message);

}  // namespace saic::protocol
