#pragma once

#include <memory>
#include <string>
#include <thread>

#include "edgeflow/egress/metrics.hpp"
#include "edgeflow/ingest/router.hpp"

namespace httplib {
class Server;
}

namespace edgeflow {

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

// POST /ingest/{source_id}: 202 accepted, 404 unknown (or non-HTTP) source,
// 400 translate error, 503 when every subscribed queue dropped the item.
// The measurement is enqueued before the reply is produced.
HttpReply handle_ingest(Router& router, const std::string& source_id, const std::string& body, Timestamp arrival);

// GET /status
HttpReply handle_status(const Metrics& metrics);

// Serves both endpoints on a background thread.
class HttpReceiver {
 public:
  HttpReceiver(Router& router, Metrics& metrics);
  ~HttpReceiver();

  HttpReceiver(const HttpReceiver&) = delete;
  HttpReceiver& operator=(const HttpReceiver&) = delete;

  // Binds and starts serving; port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  Router& router_;
  Metrics& metrics_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace edgeflow
