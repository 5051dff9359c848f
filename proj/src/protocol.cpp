#include "saic/protocol.hpp"

#include "saic/png_io.hpp"

namespace saic::protocol {

namespace {

[[noreturn]] void bad(const std::string& message) { throw Error(Errc::MalformedResponse, message); }

const json& field(const json& body, const char* name) {
  if (!body.is_object()) bad("payload is not a JSON object");
  auto it = body.find(name);
  if (it == body.end()) bad(std::string("missing field '") + name + "'");
  return *it;
}

json encode_bbox(const Bbox& b) { return json::array({b.x, b.y, b.w, b.h}); }

Bbox decode_bbox(const json& v) {
  if (!v.is_array() || v.size() != 4) bad("bbox must be [x, y, w, h]");
  for (const auto& e : v) {
    if (!e.is_number_integer()) bad("bbox entries must be integers");
  }
  return {v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>()};
}

backends::Vector decode_vector(const json& v, const char* what) {
  if (!v.is_array()) bad(std::string(what) + " must be an array of numbers");
  backends::Vector out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) bad(std::string(what) + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

backends::TokenSequence decode_tokens(const json& v) {
  if (!v.is_array()) bad("tokens must be an array of arrays");
  backends::TokenSequence out;
  for (const auto& t : v) out.push_back(decode_vector(t, "token"));
  return out;
}

json encode_tokens(const backends::TokenSequence& tokens) {
  json out = json::array();
  for (const auto& t : tokens) out.push_back(t);
  return out;
}

std::string string_field(const json& body, const char* name) {
  const auto& v = field(body, name);
  if (!v.is_string()) bad(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

std::string encode_raster(const Raster& image) { return base64_encode(png::encode(image)); }

Raster decode_raster(const json& value, const char* name) {
  if (!value.is_string()) bad(std::string("field '") + name + "' must be a base64 PNG string");
  const auto bytes = base64_decode(value.get<std::string>());
  return png::decode(bytes);
}

json encode(const SegmentRequest& req) {
  return {{"image", encode_raster(req.image)}, {"bbox", encode_bbox(req.bbox)}};
}

SegmentRequest decode_segment_request(const json& body) {
  return {decode_raster(field(body, "image"), "image"), decode_bbox(field(body, "bbox"))};
}

json encode_segment_response(const Raster& mask) { return {{"mask", encode_raster(mask)}}; }

Raster decode_segment_response(const json& body) { return decode_raster(field(body, "mask"), "mask"); }

json encode(const EmbedRequest& req) {
  return {{"image", encode_raster(req.image)},
          {"mask", req.mask ? json(encode_raster(*req.mask)) : json(nullptr)},
          {"dim", req.dim}};
}

EmbedRequest decode_embed_request(const json& body) {
  EmbedRequest req;
  req.image = decode_raster(field(body, "image"), "image");
  if (auto it = body.find("mask"); it != body.end() && !it->is_null()) req.mask = decode_raster(*it, "mask");
  const auto& dim = field(body, "dim");
  if (!dim.is_number_integer() || dim.get<int>() <= 0) bad("dim must be a positive integer");
  req.dim = dim.get<int>();
  return req;
}

json encode_embed_response(const backends::EmbeddingBundle& bundle) {
  return {{"global", bundle.global}, {"tokens", bundle.tokens ? encode_tokens(*bundle.tokens) : json(nullptr)}};
}

backends::EmbeddingBundle decode_embed_response(const json& body) {
  backends::EmbeddingBundle out;
  out.global = decode_vector(field(body, "global"), "global");
  if (auto it = body.find("tokens"); it != body.end() && !it->is_null()) out.tokens = decode_tokens(*it);
  return out;
}

json encode(const backends::GenerationRequest& req) {
  json body = {{"background", encode_raster(req.background)},
               {"conditioning", encode_raster(req.conditioning)},
               {"shape_mask", encode_raster(req.shape_mask)},
               {"bbox", encode_bbox(req.bbox)},
               {"id_tokens", encode_tokens(req.id_tokens)},
               {"seed", req.seed},
               {"variant", backends::to_string(req.variant)}};
  if (req.candidate) body["candidate"] = encode_raster(*req.candidate);
  return body;
}

backends::GenerationRequest decode_compose_request(const json& body) {
  backends::GenerationRequest req;
  req.background = decode_raster(field(body, "background"), "background");
  req.conditioning = decode_raster(field(body, "conditioning"), "conditioning");
  req.shape_mask = decode_raster(field(body, "shape_mask"), "shape_mask");
  req.bbox = decode_bbox(field(body, "bbox"));
  req.id_tokens = decode_tokens(field(body, "id_tokens"));
  const auto& seed = field(body, "seed");
  if (!seed.is_number_integer()) bad("seed must be an integer");
  req.seed = seed.get<std::uint64_t>();
  req.variant = backends::variant_from_string(string_field(body, "variant"));
  if (auto it = body.find("candidate"); it != body.end() && !it->is_null()) {
    req.candidate = decode_raster(*it, "candidate");
  }
  return req;
}

json encode_compose_response(const Raster& image) { return {{"image", encode_raster(image)}}; }

Raster decode_compose_response(const json& body) { return decode_raster(field(body, "image"), "image"); }

json encode(const JudgeRequest& req) {
  return {{"image_a", encode_raster(req.image_a)}, {"image_b", encode_raster(req.image_b)}, {"prompt", req.prompt}};
}

JudgeRequest decode_judge_request(const json& body) {
  return {decode_raster(field(body, "image_a"), "image_a"), decode_raster(field(body, "image_b"), "image_b"),
          string_field(body, "prompt")};
}

json encode_judge_response(const std::string& text) { return {{"text", text}}; }

std::string decode_judge_response(const json& body) { return string_field(body, "text"); }

json error_body(const std::string& message) { return {{"error", message}}; }

}  // namespace saic::protocol
