#include "saic/protocol_server.hpp"

#include <chrono>

#include <httplib.h>

#include "saic/protocol.hpp"

namespace saic::protocol {

namespace {

int status_for(const Error& e) {
  switch (e.code()) {
    case Errc::MalformedResponse:
    case Errc::InvalidArgument:
    case Errc::RegionOutOfBounds:
    case Errc::DimensionMismatch:
    case Errc::EmptyImage:
    case Errc::EmptySelection:
    case Errc::EmptyMask:
      return 400;
    default:
      return 500;
  }
}

template <typename Handler>
httplib::Server::Handler json_route(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(error_body(std::string("invalid JSON: ") + e.what()).dump(), "application/json");
      return;
    }
    try {
      res.set_content(handler(body).dump(), "application/json");
      res.status = 200;
    } catch (const Error& e) {
      res.status = status_for(e);
      res.set_content(error_body(e.what()).dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(error_body(e.what()).dump(), "application/json");
    }
  };
}

}  // namespace

ProtocolServer::ProtocolServer(backends::BackendSet backends)
    : backends_(std::move(backends)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ProtocolServer::~ProtocolServer() { stop(); }

void ProtocolServer::install_routes() {
  auto& b = backends_;
  server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"status\":\"ok\"}", "application/json");
  });
  server_->Post(kSegmentPath, json_route([&b](const json& body) {
                  const auto req = decode_segment_request(body);
                  return encode_segment_response(b.segmentation->segment(req.image, req.bbox));
                }));
  server_->Post(kEmbedPath, json_route([&b](const json& body) {
                  const auto req = decode_embed_request(body);
                  if (req.dim != b.embedding->dim()) {
                    throw Error(Errc::InvalidArgument, "server embeds to dim " + std::to_string(b.embedding->dim()));
                  }
                  return encode_embed_response(b.embedding->embed(req.image, req.mask ? &*req.mask : nullptr));
                }));
  server_->Post(kComposePath, json_route([&b](const json& body) {
                  return encode_compose_response(b.generation->generate(decode_compose_request(body)));
                }));
  server_->Post(kJudgePath, json_route([&b](const json& body) {
                  const auto req = decode_judge_request(body);
                  const auto verdict = b.judge->judge(req.image_a, req.image_b, req.prompt);
                  return encode_judge_response(verdict.raw);
                }));
}

int ProtocolServer::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ <= 0) throw Error(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ProtocolServer::listen_blocking(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) throw Error(Errc::IoError, "cannot listen on " + host + ":" + std::to_string(port));
}

void ProtocolServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string ProtocolServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace saic::protocol
