#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "saic/backends.hpp"
#include "saic/util.hpp"

namespace saic::backends {

struct HttpOptions {
  std::string endpoint;  // e.g. "http://127.0.0.1:8000"
  double timeout_s = 120.0;
  int retries = 3;
  int backoff_ms = 200;  // doubled after every failed attempt
  int max_connections = 4;
  std::string bearer_token;  // empty: no Authorization header
};

struct HttpReply {
  int status = 0;  // 0 when no response was received
  std::string body;
};

using HttpTransport = std::function<HttpReply(const std::string& path, const std::string& body)>;

/// JSON POST with bounded concurrency and retries. Connection failures, 429
/// and 5xx are retried with exponential backoff; a 2xx is never retried.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(HttpOptions options);
  /// Injectable transport for tests.
  HttpJsonClient(HttpOptions options, HttpTransport transport);

  /// Returns the parsed 2xx body. Exhausted retries -> BackendUnavailable;
  /// other non-2xx -> RequestRejected carrying the server "error" string;
  /// undecodable body -> MalformedResponse.
  json post(const std::string& path, const json& body);

  int attempts_made() const { return attempts_.load(); }
  const HttpOptions& options() const { return options_; }

 private:
  HttpReply send(const std::string& path, const std::string& body);

  HttpOptions options_;
  HttpTransport transport_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  std::atomic<int> attempts_{0};
};

class HttpSegmentation final : public SegmentationBackend {
 public:
  explicit HttpSegmentation(std::shared_ptr<HttpJsonClient> client) : client_(std::move(client)) {}

 protected:
  Raster do_segment(const Raster& image, const Bbox& bbox) override;

 private:
  std::shared_ptr<HttpJsonClient> client_;
};

class HttpEmbedding final : public EmbeddingBackend {
 public:
  HttpEmbedding(std::shared_ptr<HttpJsonClient> client, int dim) : EmbeddingBackend(dim), client_(std::move(client)) {}

 protected:
  EmbeddingBundle do_embed(const Raster& image, const Raster* mask) override;

 private:
  std::shared_ptr<HttpJsonClient> client_;
};

class HttpGeneration final : public GenerationBackend {
 public:
  explicit HttpGeneration(std::shared_ptr<HttpJsonClient> client) : client_(std::move(client)) {}

 protected:
  Raster do_generate(const GenerationRequest& request) override;

 private:
  std::shared_ptr<HttpJsonClient> client_;
};

class HttpJudge final : public JudgeBackend {
 public:
  explicit HttpJudge(std::shared_ptr<HttpJsonClient> client) : client_(std::move(client)) {}

 protected:
  std::string do_judge(const Raster& image_a, const Raster& image_b, const std::string& prompt) override;

 private:
  std::shared_ptr<HttpJsonClient> client_;
};

struct LiveEndpoints {
  HttpOptions segment;
  HttpOptions embed;
  HttpOptions compose;
  HttpOptions judge;
};

BackendSet make_http_backends(const LiveEndpoints& endpoints, int embedding_dim);

}  // namespace saic::backends
