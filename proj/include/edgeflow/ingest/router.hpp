#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edgeflow/core/errors.hpp"
#include "edgeflow/core/types.hpp"
#include "edgeflow/egress/metrics.hpp"
#include "edgeflow/ingest/bounded_queue.hpp"
#include "edgeflow/ingest/translator.hpp"

namespace edgeflow {

using EnvQueue = BoundedQueue<Measurement>;

enum class EnqueueOutcome { enqueued, dropped_full };

struct RouteResult {
  std::string environment_id;
  EnqueueOutcome outcome;
};

class UnknownEnvironment : public Error {
 public:
  explicit UnknownEnvironment(const std::string& id) : Error("UnknownEnvironment", "unknown environment '" + id + "'") {}
};

class UnknownSource : public Error {
 public:
  explicit UnknownSource(const std::string& id) : Error("UnknownSource", "unknown source '" + id + "'") {}
};

// Owns one bounded queue per environment and fans translated measurements
// out to every subscribed environment. Thread-safe for concurrent receivers.
class Router {
 public:
  Router(const Config& config, Metrics& metrics);

  EnvQueue& queue(std::string_view environment_id);

  // One copy per subscription, stamped with that environment's id.
  std::vector<RouteResult> route(const Measurement& m, std::span<const std::string> subscriptions);

  // translate + route for a configured source. Throws UnknownSource, or the
  // TranslateError after counting it.
  std::vector<RouteResult> submit(const RawEvent& event);

  const Config& config() const { return config_; }

 private:
  struct SourceRoute {
    const SourceSpec* spec;
    Timestamp earliest;
  };

  const Config& config_;
  Metrics& metrics_;
  std::map<std::string, std::unique_ptr<EnvQueue>, std::less<>> queues_;
  std::map<std::string, SourceRoute, std::less<>> sources_;
};

}  // namespace edgeflow
