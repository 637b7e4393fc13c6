#include "edgeflow/ingest/router.hpp"

#include <algorithm>

namespace edgeflow {

Router::Router(const Config& config, Metrics& metrics) : config_(config), metrics_(metrics) {
  for (const EnvironmentConfig& env : config.environments) {
    queues_.emplace(env.environment_id, std::make_unique<EnvQueue>(env.queue_capacity));
  }
  for (const SourceSpec& s : config.sources) {
    Timestamp earliest{};
    for (const std::string& env_id : s.environments) {
      const EnvironmentConfig* env = config.find_environment(env_id);
      if (!env) throw UnknownEnvironment(env_id);
      earliest = std::max(earliest, env->epoch_origin);
    }
    sources_.emplace(s.source_id, SourceRoute{&s, earliest});
  }
}

EnvQueue& Router::queue(std::string_view environment_id) {
  const auto it = queues_.find(environment_id);
  if (it == queues_.end()) throw UnknownEnvironment(std::string(environment_id));
  return *it->second;
}

std::vector<RouteResult> Router::route(const Measurement& m, std::span<const std::string> subscriptions) {
  std::vector<RouteResult> out;
  out.reserve(subscriptions.size());
  for (const std::string& env_id : subscriptions) {
    Measurement copy = m;
    copy.environment_id = env_id;
    const bool ok = queue(env_id).try_push(std::move(copy));
    (ok ? metrics_.enqueued : metrics_.dropped_full).fetch_add(1, std::memory_order_relaxed);
    out.push_back({env_id, ok ? EnqueueOutcome::enqueued : EnqueueOutcome::dropped_full});
  }
  return out;
}

std::vector<RouteResult> Router::submit(const RawEvent& event) {
  const auto it = sources_.find(event.source_id);
  if (it == sources_.end()) throw UnknownSource(event.source_id);
  metrics_.events_received.fetch_add(1, std::memory_order_relaxed);

  Measurement m;
  try {
    m = translate(event, it->second.spec->translator, it->second.earliest);
  } catch (const TranslateError&) {
    metrics_.translate_errors.fetch_add(1, std::memory_order_relaxed);
    throw;
  }
  metrics_.events_translated.fetch_add(1, std::memory_order_relaxed);
  return route(m, it->second.spec->environments);
}

}  // namespace edgeflow
