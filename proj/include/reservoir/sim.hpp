#pragma once

#include "reservoir/config.hpp"
#include "reservoir/control.hpp"
#include "reservoir/device.hpp"
#include "reservoir/edge_node.hpp"
#include "reservoir/forwarder.hpp"
#include "reservoir/run_log.hpp"
#include "reservoir/workload.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <queue>
#include <vector>

namespace reservoir {

/// Deterministic discrete-event queue ordered by (time, sequence).
class EventQueue
{
public:
  using Action = std::function<void()>;

  /// Throws SimulationError when `at` precedes the current time.
  void
  schedule_at(SimTime at, Action action);

  /// Pops and runs the next event. Returns false when empty.
  bool
  step();

  SimTime
  now() const
  {
    return now_;
  }

  bool
  empty() const
  {
    return heap_.empty();
  }

  std::uint64_t
  dispatched() const
  {
    return dispatched_;
  }

private:
  struct Event
  {
    SimTime time;
    std::uint64_t seq;
    Action action;
  };

  struct Later
  {
    bool
    operator()(const Event& a, const Event& b) const
    {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  SimTime now_{0};
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
};

/// A bucket layout in force from `time` on.
struct AssignmentEpoch
{
  SimTime time{0};
  std::map<Name, std::vector<RfibEntry>> rfib;
};

/// Sub-seed for an independent stream of a run.
std::uint64_t
derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Builds the topology a config describes for its seed.
Topology
build_topology(const SimConfig& config);

/// Builds the workload a config describes for its seed and topology.
Workload
build_workload(const SimConfig& config, const Topology& topo);

class Simulation
{
public:
  /// `workload` overrides the generated one.
  explicit Simulation(SimConfig config, std::optional<Workload> workload = std::nullopt);
  ~Simulation();

  Simulation(const Simulation&) = delete;
  Simulation&
  operator=(const Simulation&) = delete;

  /// JSON-lines trace sink; null disables tracing.
  void
  set_trace(std::ostream* out);

  /// Runs to quiescence. Throws SimulationError when sessions are left pending.
  void
  run();

  const SimConfig&
  config() const
  {
    return config_;
  }

  const Topology&
  topology() const
  {
    return topology_;
  }

  const Workload&
  workload() const
  {
    return workload_;
  }

  const RunLog&
  log() const
  {
    return log_;
  }

  const HashFamily&
  family() const
  {
    return *family_;
  }

  const std::vector<AssignmentEpoch>&
  epochs() const
  {
    return epochs_;
  }

  Forwarder&
  forwarder(const std::string& node_id);

  /// Null when the node hosts no EN.
  EdgeNode*
  edge_node(const std::string& node_id);

  EdgeNode*
  edge_node_by_prefix(const Name& prefix);

  Device*
  device(const std::string& node_id);

  std::vector<std::string>
  node_ids() const;

  std::uint64_t
  events_dispatched() const
  {
    return queue_.dispatched();
  }

  SimTime
  now() const
  {
    return queue_.now();
  }

private:
  class NodeContext;
  struct Node;

  void
  build();

  void
  install_rfib(const std::map<Name, std::vector<RfibEntry>>& rfib);

  void
  deliver_interest(std::size_t node, Interest interest, FaceId in_face);

  void
  deliver_data(std::size_t node, Data data, FaceId in_face);

  void
  transmit(std::size_t node, FaceId face, Packet packet, Duration processing);

  void
  rebalance_tick(SimTime window_start);

  void
  record_trace(const std::string& node, std::string_view event, const Name& name,
               const nlohmann::ordered_json& detail);

  Duration
  path_rtt(std::size_t node, const Name& prefix);

  SimConfig config_;
  Topology topology_;
  Workload workload_;
  std::shared_ptr<const HashFamily> family_;
  std::vector<std::vector<Adjacency>> adjacency_;
  std::vector<std::unique_ptr<Node>> nodes_;
  EventQueue queue_;
  RunLog log_;
  std::map<InstanceId, CompletionSource> network_outcomes_;
  std::map<std::pair<std::size_t, Name>, Duration> rtt_cache_;
  std::vector<AssignmentEpoch> epochs_;
  std::mt19937_64 loss_rng_;
  std::ostream* trace_ = nullptr;
  bool ran_ = false;
};

} // namespace reservoir
