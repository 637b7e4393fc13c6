#include "edgeflow/ingest/http_receiver.hpp"

#include <chrono>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace edgeflow {

using nlohmann::json;

namespace {

HttpReply error_reply(int status, const std::string& error, const std::string& detail) {
  return {status, json{{"error", error}, {"detail", detail}}.dump()};
}

}  // namespace

HttpReply handle_ingest(Router& router, const std::string& source_id, const std::string& body, Timestamp arrival) {
  const SourceSpec* source = router.config().find_source(source_id);
  if (!source || source->kind != SourceKind::http) {
    return error_reply(404, "UnknownSource", "no HTTP source named '" + source_id + "'");
  }
  if (body.empty()) return error_reply(400, "PayloadParseError", "empty body");

  std::vector<RouteResult> results;
  try {
    results = router.submit(RawEvent{source_id, arrival, body, SourceKind::http});
  } catch (const TranslateError& e) {
    return error_reply(400, "TranslateError", e.kind() + ": " + e.what());
  }
  const bool any_enqueued = std::any_of(results.begin(), results.end(),
                                        [](const RouteResult& r) { return r.outcome == EnqueueOutcome::enqueued; });
  if (!any_enqueued) return error_reply(503, "QueueFull", "every subscribed environment queue is full");
  return {202, json{{"status", "accepted"}}.dump()};
}

HttpReply handle_status(const Metrics& metrics) { return {200, metrics.snapshot().to_json().dump()}; }

HttpReceiver::HttpReceiver(Router& router, Metrics& metrics)
    : router_(router), metrics_(metrics), server_(std::make_unique<httplib::Server>()) {
  server_->Post(R"(/ingest/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const HttpReply reply = handle_ingest(router_, req.matches[1], req.body,
                                              std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now()));
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });
  server_->Get("/status", [this](const httplib::Request&, httplib::Response& res) {
    const HttpReply reply = handle_status(metrics_);
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });
}

HttpReceiver::~HttpReceiver() { stop(); }

int HttpReceiver::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("BindError", "cannot bind HTTP receiver to " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpReceiver::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace edgeflow
