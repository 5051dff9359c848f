#include "saic/http_backend.hpp"

#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "saic/protocol.hpp"

namespace saic::backends {

namespace {

HttpTransport default_transport(const HttpOptions& options) {
  return [options](const std::string& path, const std::string& body) -> HttpReply {
    httplib::Client client(options.endpoint);
    const auto sec = static_cast<time_t>(options.timeout_s);
    const auto usec = static_cast<time_t>((options.timeout_s - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    httplib::Headers headers;
    if (!options.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + options.bearer_token);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) return {0, httplib::to_string(res.error())};
    return {res->status, res->body};
  };
}

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

std::string server_error(const HttpReply& reply) {
  try {
    const auto doc = json::parse(reply.body);
    if (doc.is_object() && doc.contains("error") && doc["error"].is_string()) return doc["error"].get<std::string>();
  } catch (const json::exception&) {
  }
  return reply.body.substr(0, 200);
}

}  // namespace

HttpJsonClient::HttpJsonClient(HttpOptions options) : options_(std::move(options)) {
  transport_ = default_transport(options_);
}

HttpJsonClient::HttpJsonClient(HttpOptions options, HttpTransport transport)
    : options_(std::move(options)), transport_(std::move(transport)) {}

HttpReply HttpJsonClient::send(const std::string& path, const std::string& body) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < std::max(1, options_.max_connections); });
    ++in_flight_;
  }
  HttpReply reply;
  try {
    ++attempts_;
    reply = transport_(path, body);
  } catch (...) {
    std::lock_guard lock(mu_);
    --in_flight_;
    cv_.notify_one();
    throw;
  }
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
  return reply;
}

json HttpJsonClient::post(const std::string& path, const json& body) {
  const std::string payload = body.dump();
  HttpReply reply;
  for (int attempt = 0;; ++attempt) {
    reply = send(path, payload);
    if (reply.status >= 200 && reply.status < 300) {
      try {
        return json::parse(reply.body);
      } catch (const json::exception& e) {
        throw Error(Errc::MalformedResponse, options_.endpoint + path + ": " + e.what());
      }
    }
    if (!retryable(reply.status)) {
      throw Error(Errc::RequestRejected,
                  options_.endpoint + path + " returned " + std::to_string(reply.status) + ": " + server_error(reply));
    }
    if (attempt >= options_.retries) break;
    const auto delay = std::chrono::milliseconds(static_cast<long long>(options_.backoff_ms) << std::min(attempt, 20));
    spdlog::debug("{}{}: attempt {} failed (status {}), retrying in {} ms", options_.endpoint, path, attempt + 1,
                  reply.status, delay.count());
    std::this_thread::sleep_for(delay);
  }
  const std::string why = reply.status == 0 ? reply.body : "status " + std::to_string(reply.status) + ": " + server_error(reply);
  throw Error(Errc::BackendUnavailable, options_.endpoint + path + " after " + std::to_string(options_.retries + 1) +
                                            " attempts: " + why);
}

Raster HttpSegmentation::do_segment(const Raster& image, const Bbox& bbox) {
  return protocol::decode_segment_response(client_->post(protocol::kSegmentPath, protocol::encode(protocol::SegmentRequest{image, bbox})));
}

EmbeddingBundle HttpEmbedding::do_embed(const Raster& image, const Raster* mask) {
  protocol::EmbedRequest req{image, mask ? std::optional<Raster>(*mask) : std::nullopt, dim()};
  return protocol::decode_embed_response(client_->post(protocol::kEmbedPath, protocol::encode(req)));
}

Raster HttpGeneration::do_generate(const GenerationRequest& request) {
  try {
    return protocol::decode_compose_response(client_->post(protocol::kComposePath, protocol::encode(request)));
  } catch (const Error& e) {
    if (e.code() == Errc::RequestRejected) throw Error(Errc::GenerationRejected, e.what());
    throw;
  }
}

std::string HttpJudge::do_judge(const Raster& image_a, const Raster& image_b, const std::string& prompt) {
  return protocol::decode_judge_response(
      client_->post(protocol::kJudgePath, protocol::encode(protocol::JudgeRequest{image_a, image_b, prompt})));
}

BackendSet make_http_backends(const LiveEndpoints& endpoints, int embedding_dim) {
  BackendSet set;
  set.segmentation = std::make_shared<HttpSegmentation>(std::make_shared<HttpJsonClient>(endpoints.segment));
  set.embedding = std::make_shared<HttpEmbedding>(std::make_shared<HttpJsonClient>(endpoints.embed), embedding_dim);
  set.generation = std::make_shared<HttpGeneration>(std::make_shared<HttpJsonClient>(endpoints.compose));
  set.judge = std::make_shared<HttpJudge>(std::make_shared<HttpJsonClient>(endpoints.judge));
  set.description = "live";
  return set;
}

}  // namespace saic::backends
