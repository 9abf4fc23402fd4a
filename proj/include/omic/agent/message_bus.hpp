#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "omic/agent/agent.hpp"

namespace omic::agent {

// In-process delivery between agents, FIFO and therefore deterministic.
// Routes on the envelope's `to` key and keeps the wire transcript an
// eavesdropper would see.
class MessageBus {
 public:
  using EventSink = std::function<void(Agent&, const json&)>;
  // Returning false drops the envelope; the interceptor may also modify it.
  using Interceptor = std::function<bool(Envelope&)>;

  void attach(Agent& agent) { agents_.push_back(&agent); }
  void on_event(EventSink sink) { sink_ = std::move(sink); }
  void set_interceptor(Interceptor i) { interceptor_ = std::move(i); }

  void post(Envelope e) { queue_.push_back(std::move(e)); }
  void post(Effects&& fx, Agent& origin);

  // Delivers until the queue drains. Returns the number of deliveries.
  std::size_t run(std::size_t max_deliveries = 1'000'000);

  const std::vector<json>& wire() const { return wire_; }
  // Envelopes that no agent accepted or that failed to unpack.
  const std::vector<json>& failures() const { return failures_; }

 private:
  Agent* route(const std::string& to) const;

  std::vector<Agent*> agents_;
  std::deque<Envelope> queue_;
  std::vector<json> wire_;
  std::vector<json> failures_;
  EventSink sink_;
  Interceptor interceptor_;
};

}  // namespace omic::agent
