#pragma once

#include "reservoir/application.hpp"
#include "reservoir/run_log.hpp"

#include <functional>
#include <map>
#include <vector>

namespace reservoir::testing {

/// Scripted node context: records what an application sends and runs its
/// scheduled callbacks in time order when advanced.
class FakeContext : public AppContext
{
public:
  struct Sent
  {
    SimTime at;
    Packet packet;
  };

  SimTime
  now() const override
  {
    return now_;
  }

  void
  send_interest(Interest interest, Duration delay) override
  {
    sent.push_back({now_ + delay, std::move(interest)});
  }

  void
  send_data(Data data, Duration delay) override
  {
    sent.push_back({now_ + delay, std::move(data)});
  }

  void
  schedule(Duration delay, std::function<void(AppContext&)> callback) override
  {
    timers_.emplace(std::make_pair(now_ + delay, seq_++), std::move(callback));
  }

  void
  cache_locally(Data data) override
  {
    cached.push_back(std::move(data));
  }

  Duration
  path_rtt(const Name&) const override
  {
    return rtt;
  }

  std::optional<CompletionSource>
  network_outcome(InstanceId instance) const override
  {
    auto it = outcomes.find(instance);
    if (it == outcomes.end()) {
      return std::nullopt;
    }
    return it->second;
  }

  RunLog&
  log() override
  {
    return run_log;
  }

  void
  trace(std::string_view event, const Name&, nlohmann::ordered_json) override
  {
    traced.emplace_back(event);
  }

  /// Runs every timer due at or before `until`.
  void
  advance_to(SimTime until)
  {
    while (!timers_.empty() && timers_.begin()->first.first <= until) {
      auto node = timers_.extract(timers_.begin());
      now_ = node.key().first;
      node.mapped()(*this);
    }
    now_ = until;
  }

  void
  advance(Duration d)
  {
    advance_to(now_ + d);
  }

  std::size_t
  pending_timers() const
  {
    return timers_.size();
  }

  std::vector<const Interest*>
  interests() const
  {
    std::vector<const Interest*> out;
    for (const auto& s : sent) {
      if (const auto* i = std::get_if<Interest>(&s.packet)) {
        out.push_back(i);
      }
    }
    return out;
  }

  std::vector<const Sent*>
  data() const
  {
    std::vector<const Sent*> out;
    for (const auto& s : sent) {
      if (std::holds_alternative<Data>(s.packet)) {
        out.push_back(&s);
      }
    }
    return out;
  }

  std::vector<Sent> sent;
  std::vector<Data> cached;
  std::vector<std::string> traced;
  std::map<InstanceId, CompletionSource> outcomes;
  RunLog run_log;
  Duration rtt{std::chrono::milliseconds{18}};

private:
  SimTime now_{0};
  std::uint64_t seq_ = 0;
  std::map<std::pair<SimTime, std::uint64_t>, std::function<void(AppContext&)>> timers_;
};

} // namespace reservoir::testing
