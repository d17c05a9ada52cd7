#pragma once

#include "reservoir/packet.hpp"
#include "reservoir/run_log.hpp"

#include <functional>
#include <optional>
#include <string_view>

#include "json.hpp"

namespace reservoir {

/// Services a node's application gets from the simulation.
class AppContext
{
public:
  virtual ~AppContext() = default;

  virtual SimTime
  now() const = 0;

  /// Hands a packet to the local forwarder after `delay`.
  virtual void
  send_interest(Interest interest, Duration delay = Duration{0}) = 0;

  virtual void
  send_data(Data data, Duration delay = Duration{0}) = 0;

  virtual void
  schedule(Duration delay, std::function<void(AppContext&)> callback) = 0;

  /// Places a Data packet in the local forwarder's Content Store.
  virtual void
  cache_locally(Data data) = 0;

  /// Round-trip estimate toward a routable prefix.
  virtual Duration
  path_rtt(const Name& prefix) const = 0;

  /// How the network satisfied the instance's task Interest, when it did so
  /// without an EN (CS hit or PIT aggregation).
  virtual std::optional<CompletionSource>
  network_outcome(InstanceId instance) const = 0;

  virtual RunLog&
  log() = 0;

  virtual void
  trace(std::string_view event, const Name& name, nlohmann::ordered_json detail) = 0;
};

class Application
{
public:
  virtual ~Application() = default;

  virtual void
  on_interest(const Interest& interest, AppContext& ctx) = 0;

  virtual void
  on_data(const Data& data, AppContext& ctx) = 0;
};

} // namespace reservoir
