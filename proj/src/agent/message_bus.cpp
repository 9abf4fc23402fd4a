#include "omic/agent/message_bus.hpp"

#include "omic/error.hpp"

namespace omic::agent {

void MessageBus::post(Effects&& fx, Agent& origin) {
  for (auto& e : fx.out) queue_.push_back(std::move(e));
  if (sink_) {
    for (const auto& ev : fx.events) sink_(origin, ev);
  }
}

Agent* MessageBus::route(const std::string& to) const {
  for (auto* a : agents_) {
    if (a->owns_key(to)) return a;
  }
  return nullptr;
}

std::size_t MessageBus::run(std::size_t max_deliveries) {
  std::size_t n = 0;
  while (!queue_.empty() && n < max_deliveries) {
    auto e = std::move(queue_.front());
    queue_.pop_front();
    if (interceptor_ && !interceptor_(e)) continue;
    wire_.push_back(e.to_json());
    ++n;
    auto* target = route(e.to);
    if (!target) {
      failures_.push_back({{"to", e.to}, {"code", "unknown-recipient"}});
      continue;
    }
    try {
      post(target->dispatch(e), *target);
    } catch (const Error& err) {
      failures_.push_back({{"to", e.to}, {"agent", target->label()}, {"code", err.code()}, {"detail", err.what()}});
    }
  }
  return n;
}

}  // namespace omic::agent
