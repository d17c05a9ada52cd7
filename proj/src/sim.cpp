#include "reservoir/sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <ostream>
#include <set>

namespace reservoir {

using nlohmann::ordered_json;

void
EventQueue::schedule_at(SimTime at, Action action)
{
  if (at < now_) {
    throw SimulationError(fmt::format("event scheduled in the past ({} < {} us)", at.count(),
                                      now_.count()));
  }
  heap_.push(Event{at, next_seq_++, std::move(action)});
}

bool
EventQueue::step()
{
  if (heap_.empty()) {
    return false;
  }
  Event ev = heap_.top();
  heap_.pop();
  now_ = ev.time;
  ++dispatched_;
  ev.action();
  return true;
}

std::uint64_t
derive_seed(std::uint64_t seed, std::uint64_t stream)
{
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Topology
build_topology(const SimConfig& config)
{
  Topology t;
  if (config.topology.generated) {
    TopologyParams p = config.topology.params;
    p.seed = derive_seed(config.seed, 1);
    t = generate_topology(p);
  }
  else {
    t = config.topology.explicit_topology;
  }
  t.validate();
  return t;
}

Workload
build_workload(const SimConfig& config, const Topology& topo)
{
  WorkloadParams p = config.workload;
  p.seed = derive_seed(config.seed, 2);
  p.dimension = config.hash.dimension;
  if (p.services.empty()) {
    for (const auto& s : config.services) {
      p.services.push_back(s.name);
    }
  }
  const auto devices = topo.device_nodes();
  if (config.explicit_tasks.empty()) {
    return generate_workload(p, devices.size());
  }

  std::size_t clusters = 1;
  for (const auto& e : config.explicit_tasks) {
    clusters = std::max(clusters, e.cluster + 1);
  }
  p.count = 0;
  p.num_clusters = std::max(clusters, p.num_clusters.value_or(clusters));
  Workload w = generate_workload(p, devices.size());
  std::vector<ExplicitTask> tasks = config.explicit_tasks;
  std::stable_sort(tasks.begin(), tasks.end(),
                   [](const auto& a, const auto& b) { return a.at < b.at; });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& e = tasks[i];
    auto node = topo.find(e.device);
    if (!node || topo.nodes[*node].kind != NodeKind::Device) {
      throw ConfigError("explicit task names unknown device '" + e.device + "'");
    }
    WorkloadTask t;
    t.instance = i + 1;
    t.at = e.at;
    t.device = static_cast<std::size_t>(std::find(devices.begin(), devices.end(), *node) -
                                        devices.begin());
    t.service = e.service.empty() ? p.services.at(0) : e.service;
    t.input = FeatureVector{w.centers.at(e.cluster), static_cast<std::int64_t>(e.cluster)};
    t.threshold = e.threshold.value_or(p.threshold);
    t.deadline = p.deadline;
    t.cluster = e.cluster;
    w.tasks.push_back(std::move(t));
  }
  return w;
}

struct Simulation::Node
{
  std::string id;
  NodeKind kind = NodeKind::Router;
  std::unique_ptr<Forwarder> forwarder;
  std::unique_ptr<Application> app;
  EdgeNode* en = nullptr;
  Device* device = nullptr;
  std::unique_ptr<NodeContext> ctx;
};

class Simulation::NodeContext : public AppContext
{
public:
  NodeContext(Simulation& sim, std::size_t node)
    : sim_(sim)
    , node_(node)
  {
  }

  SimTime
  now() const override
  {
    return sim_.queue_.now();
  }

  void
  send_interest(Interest interest, Duration delay) override
  {
    sim_.queue_.schedule_at(now() + delay, [this, i = std::move(interest)]() mutable {
      sim_.deliver_interest(node_, std::move(i), kAppFace);
    });
  }

  void
  send_data(Data data, Duration delay) override
  {
    sim_.queue_.schedule_at(now() + delay, [this, d = std::move(data)]() mutable {
      sim_.deliver_data(node_, std::move(d), kAppFace);
    });
  }

  void
  schedule(Duration delay, std::function<void(AppContext&)> callback) override
  {
    sim_.queue_.schedule_at(now() + delay, [this, cb = std::move(callback)]() { cb(*this); });
  }

  void
  cache_locally(Data data) override
  {
    auto& cs = sim_.nodes_[node_]->forwarder->cs();
    if (cs.capacity() > 0) {
      cs.insert(std::move(data), now());
    }
  }

  Duration
  path_rtt(const Name& prefix) const override
  {
    return sim_.path_rtt(node_, prefix);
  }

  std::optional<CompletionSource>
  network_outcome(InstanceId instance) const override
  {
    auto it = sim_.network_outcomes_.find(instance);
    if (it == sim_.network_outcomes_.end()) {
      return std::nullopt;
    }
    return it->second;
  }

  RunLog&
  log() override
  {
    return sim_.log_;
  }

  void
  trace(std::string_view event, const Name& name, ordered_json detail) override
  {
    if (sim_.trace_ != nullptr) {
      sim_.record_trace(sim_.nodes_[node_]->id, event, name, detail);
    }
  }

private:
  Simulation& sim_;
  std::size_t node_;
};

Simulation::Simulation(SimConfig config, std::optional<Workload> workload)
  : config_(std::move(config))
  , loss_rng_(derive_seed(config_.seed, 3))
{
  if (auto diags = validate_config(config_); !diags.empty()) {
    throw ConfigDiagnostics(std::move(diags));
  }
  topology_ = build_topology(config_);
  workload_ = workload ? std::move(*workload) : build_workload(config_, topology_);
  build();
}

Simulation::~Simulation() = default;

void
Simulation::set_trace(std::ostream* out)
{
  trace_ = out;
}

void
Simulation::build()
{
  HashFamilyConfig hc = config_.hash;
  hc.seed = derive_seed(config_.seed, 100 + config_.hash.seed);
  family_ = std::make_shared<HashFamily>(hc);
  adjacency_ = topology_.adjacency();

  std::vector<Name> all_ens;
  for (auto i : topology_.en_nodes()) {
    all_ens.push_back(*topology_.nodes[i].en_prefix);
  }
  std::map<Name, std::vector<Name>> service_ens;
  std::set<Name> noreuse;
  for (const auto& s : config_.services) {
    service_ens[s.name] = s.ens.empty() ? all_ens : s.ens;
    if (!s.reuse) {
      noreuse.insert(s.name);
    }
  }
  const auto fibs = install_routes(topology_, service_ens);

  for (std::size_t i = 0; i < topology_.nodes.size(); ++i) {
    const auto& tn = topology_.nodes[i];
    auto node = std::make_unique<Node>();
    node->id = tn.id;
    node->kind = tn.kind;
    Forwarder::Options opts = config_.forwarder;
    opts.seed = derive_seed(config_.seed, 1000 + i);
    if (tn.kind == NodeKind::Device) {
      opts.cs_capacity = config_.device.cs_capacity;
    }
    node->forwarder = std::make_unique<Forwarder>(tn.id, opts);
    node->forwarder->fib() = fibs[i];
    node->ctx = std::make_unique<NodeContext>(*this, i);

    if (tn.en_prefix) {
      EdgeNodeConfig ec;
      ec.prefix = *tn.en_prefix;
      for (const auto& [svc, ens] : service_ens) {
        if (std::find(ens.begin(), ens.end(), ec.prefix) != ens.end()) {
          ec.services.push_back(svc);
        }
      }
      ec.hash = config_.hash;
      ec.store_capacity = config_.edge.store_capacity;
      ec.probe_radius = config_.probe_radius;
      ec.execution = config_.edge.execution;
      ec.ewma_alpha = config_.edge.ewma_alpha;
      ec.timing.search = config_.edge.search_delay;
      ec.segment_bytes = config_.offload.segment_bytes;
      ec.max_retransmissions = config_.device.max_retransmissions;
      ec.push_results = config_.offload.mode == OffloadMode::Push;
      ec.seed = derive_seed(config_.seed, 2000 + i);
      auto en = std::make_unique<EdgeNode>(std::move(ec));
      node->en = en.get();
      node->app = std::move(en);
    }
    else if (tn.kind == NodeKind::Device) {
      DeviceConfig dc;
      dc.prefix = *tn.device_prefix;
      dc.mode = config_.offload.mode;
      dc.declared_input_bytes = config_.offload.declared_input_bytes;
      dc.segment_bytes = config_.offload.segment_bytes;
      dc.timing.hashing = config_.device.hashing_delay;
      dc.noreuse_services = noreuse;
      dc.interest_timeout = config_.device.interest_timeout;
      dc.max_retransmissions = config_.device.max_retransmissions;
      auto dev = std::make_unique<Device>(std::move(dc), family_);
      node->device = dev.get();
      node->app = std::move(dev);
    }
    nodes_.push_back(std::move(node));
  }

  std::map<Name, std::vector<RfibEntry>> rfib;
  for (const auto& s : config_.services) {
    if (!s.reuse) {
      continue;
    }
    auto it = config_.explicit_rfib.find(s.name);
    rfib[s.name] = it != config_.explicit_rfib.end()
                     ? it->second
                     : assign_buckets(s.name, service_ens[s.name], config_.hash);
  }
  install_rfib(rfib);
  epochs_.push_back({SimTime{0}, std::move(rfib)});
}

void
Simulation::install_rfib(const std::map<Name, std::vector<RfibEntry>>& rfib)
{
  for (auto& node : nodes_) {
    if (node->kind != NodeKind::Router) {
      continue;
    }
    node->forwarder->rfib().clear();
    for (const auto& [service, entries] : rfib) {
      node->forwarder->rfib().install(service, localize_rfib(entries, node->forwarder->fib()));
    }
  }
  for (auto& node : nodes_) {
    if (node->en == nullptr) {
      continue;
    }
    for (const auto& [service, entries] : rfib) {
      for (const auto& e : entries) {
        if (e.en_prefix == node->en->config().prefix) {
          node->en->set_assigned_ranges(service, e.bucket_ranges);
        }
      }
    }
  }
}

void
Simulation::record_trace(const std::string& node, std::string_view event, const Name& name,
                         const ordered_json& detail)
{
  ordered_json rec;
  rec["time_us"] = queue_.now().count();
  rec["node"] = node;
  rec["event"] = event;
  rec["name"] = name.to_uri();
  rec["detail"] = detail;
  *trace_ << rec.dump() << '\n';
}

Duration
Simulation::path_rtt(std::size_t node, const Name& prefix)
{
  auto key = std::pair(node, prefix);
  if (auto it = rtt_cache_.find(key); it != rtt_cache_.end()) {
    return it->second;
  }
  Duration rtt{0};
  if (auto owner = topology_.owner_of(prefix)) {
    const auto costs = shortest_costs(topology_, *owner);
    if (costs[node].reachable) {
      rtt = 2 * costs[node].delay;
    }
  }
  rtt_cache_.emplace(key, rtt);
  return rtt;
}

void
Simulation::deliver_interest(std::size_t index, Interest interest, FaceId in_face)
{
  auto& node = *nodes_[index];
  const SimTime now = queue_.now();
  InterestOutcome out = node.forwarder->on_interest(interest, in_face, now);

  if (interest.parameters && interest.instance != 0) {
    if (out.decision == InterestDecision::CsHit) {
      network_outcomes_.emplace(interest.instance, node.kind == NodeKind::Device
                                                     ? CompletionSource::LocalCs
                                                     : CompletionSource::NetworkCs);
    }
    else if (out.decision == InterestDecision::Aggregated) {
      network_outcomes_.emplace(interest.instance, CompletionSource::PitAggregate);
    }
  }
  if (out.path == ProcessingPath::Rfib) {
    ++log_.rfib_lookups[interest.instance];
  }

  if (trace_ != nullptr) {
    ordered_json faces = ordered_json::array();
    for (const auto& o : out.out) {
      faces.push_back(o.face);
    }
    ordered_json detail;
    detail["in_face"] = in_face;
    detail["out_faces"] = faces;
    detail["delay_us"] = out.processing.count();
    detail["path"] = out.path == ProcessingPath::Rfib ? "rfib" : "fib";
    detail["instance"] = interest.instance;
    if (out.retransmission) {
      detail["retransmission"] = true;
    }
    if (out.rfib_match) {
      detail["en"] = out.rfib_match->en_prefix.to_uri();
      detail["matched_tables"] = out.rfib_match->matched_tables;
    }
    if (interest.forwarding_hint) {
      detail["hint"] = interest.forwarding_hint->en_prefix.to_uri();
    }
    if (!out.drop_reason.empty()) {
      detail["reason"] = out.drop_reason;
    }
    record_trace(node.id, to_string(out.decision), interest.name, detail);
  }

  for (auto& o : out.out) {
    transmit(index, o.face, std::move(o.packet), out.processing);
  }
}

void
Simulation::deliver_data(std::size_t index, Data data, FaceId in_face)
{
  auto& node = *nodes_[index];
  DataOutcome out = node.forwarder->on_data(data, in_face, queue_.now());
  if (trace_ != nullptr) {
    ordered_json faces = ordered_json::array();
    for (const auto& o : out.out) {
      faces.push_back(o.face);
    }
    ordered_json detail;
    detail["in_face"] = in_face;
    detail["out_faces"] = faces;
    detail["delay_us"] = out.processing.count();
    detail["cached"] = out.cached;
    if (out.evicted) {
      detail["evicted"] = out.evicted->to_uri();
    }
    record_trace(node.id, to_string(out.decision), data.name, detail);
  }
  for (auto& o : out.out) {
    transmit(index, o.face, std::move(o.packet), out.processing);
  }
}

void
Simulation::transmit(std::size_t index, FaceId face, Packet packet, Duration processing)
{
  auto& node = *nodes_[index];
  const SimTime depart = queue_.now() + processing;
  if (face == kAppFace) {
    if (!node.app) {
      if (trace_ != nullptr) {
        record_trace(node.id, "drop_no_app", packet_name(packet), ordered_json::object());
      }
      return;
    }
    queue_.schedule_at(depart, [this, index, p = std::move(packet)]() {
      auto& n = *nodes_[index];
      if (const auto* i = std::get_if<Interest>(&p)) {
        n.app->on_interest(*i, *n.ctx);
      }
      else {
        n.app->on_data(std::get<Data>(p), *n.ctx);
      }
    });
    return;
  }

  const auto& adj = adjacency_.at(index);
  if (face == 0 || face > adj.size()) {
    throw SimulationError(fmt::format("node {} has no face {}", node.id, face));
  }
  const Adjacency& link = adj[face - 1];
  if (config_.loss.rate > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(loss_rng_) < config_.loss.rate) {
      if (trace_ != nullptr) {
        record_trace(node.id, "link_drop", packet_name(packet), ordered_json{{"face", face}});
      }
      return;
    }
  }
  const std::size_t peer = link.neighbor;
  const FaceId peer_face = link.peer_face;
  queue_.schedule_at(depart + link.delay, [this, peer, peer_face, p = std::move(packet)]() mutable {
    if (auto* i = std::get_if<Interest>(&p)) {
      deliver_interest(peer, std::move(*i), peer_face);
    }
    else {
      deliver_data(peer, std::move(std::get<Data>(p)), peer_face);
    }
  });
}

void
Simulation::rebalance_tick(SimTime window_start)
{
  const SimTime now = queue_.now();
  std::map<Name, std::map<Name, std::uint64_t>> load;
  for (auto it = log_.en_events.rbegin(); it != log_.en_events.rend(); ++it) {
    const auto* a = std::get_if<EnArrival>(&*it);
    if (a == nullptr) {
      if (std::get<StoreEvent>(*it).time < window_start) {
        break;
      }
      continue;
    }
    if (a->time < window_start) {
      break;
    }
    if (a->outcome == ArrivalOutcome::Scratch) {
      ++load[a->service][Name(a->en)];
    }
  }

  auto next = epochs_.back().rfib;
  bool changed = false;
  for (auto& [service, entries] : next) {
    auto updated = rebalance(service, load[service], entries, config_.rebalance.skew);
    if (updated) {
      entries = std::move(*updated);
      changed = true;
    }
  }
  if (!changed) {
    return;
  }
  install_rfib(next);
  epochs_.push_back({now, next});
  if (trace_ != nullptr) {
    ordered_json detail = ordered_json::object();
    for (const auto& [service, entries] : next) {
      ordered_json per_en = ordered_json::object();
      for (const auto& e : entries) {
        per_en[e.en_prefix.to_uri()] = {e.bucket_ranges.front().lo, e.bucket_ranges.front().hi};
      }
      detail[service.to_uri()] = per_en;
    }
    record_trace("control", "rebalance", Name(), detail);
  }
}

void
Simulation::run()
{
  if (ran_) {
    throw SimulationError("a simulation runs once");
  }
  ran_ = true;
  const auto devices = topology_.device_nodes();
  SimTime last{0};
  for (const auto& task : workload_.tasks) {
    if (task.device >= devices.size()) {
      throw ConfigError("workload task refers to device index " + std::to_string(task.device));
    }
    const std::size_t index = devices[task.device];
    last = std::max(last, task.at);
    queue_.schedule_at(task.at, [this, index, &task]() {
      auto& n = *nodes_[index];
      n.device->offload(task.service, task.input, task.threshold, task.deadline, task.instance,
                        *n.ctx);
    });
  }
  if (config_.rebalance.enabled && !workload_.tasks.empty()) {
    const Duration w = config_.rebalance.window;
    for (SimTime t = SimTime{0} + w; t <= last + w; t += w) {
      queue_.schedule_at(t, [this, t, w]() { rebalance_tick(t - w); });
    }
  }

  while (queue_.step()) {
  }

  std::vector<std::string> stuck;
  for (const auto& node : nodes_) {
    if (node->device == nullptr) {
      continue;
    }
    for (const auto& [id, s] : node->device->sessions()) {
      if (s.state != SessionState::Done && s.state != SessionState::Failed) {
        stuck.push_back(fmt::format("{}#{} {}", node->id, id, s.task.to_uri()));
      }
    }
  }
  for (const auto& node : nodes_) {
    if (node->en != nullptr) {
      log_.en_counters[node->en->config().prefix.to_uri()] = node->en->counters();
    }
  }
  if (!stuck.empty()) {
    std::string msg = fmt::format("{} sessions left pending with an empty event queue:", stuck.size());
    for (const auto& s : stuck) {
      msg += "\n  " + s;
    }
    throw SimulationError(msg);
  }
  std::sort(log_.sessions.begin(), log_.sessions.end(),
            [](const auto& a, const auto& b) { return a.instance < b.instance; });
}

Forwarder&
Simulation::forwarder(const std::string& node_id)
{
  for (auto& n : nodes_) {
    if (n->id == node_id) {
      return *n->forwarder;
    }
  }
  throw ConfigError("unknown node '" + node_id + "'");
}

EdgeNode*
Simulation::edge_node(const std::string& node_id)
{
  for (auto& n : nodes_) {
    if (n->id == node_id) {
      return n->en;
    }
  }
  return nullptr;
}

EdgeNode*
Simulation::edge_node_by_prefix(const Name& prefix)
{
  for (auto& n : nodes_) {
    if (n->en != nullptr && n->en->config().prefix == prefix) {
      return n->en;
    }
  }
  return nullptr;
}

Device*
Simulation::device(const std::string& node_id)
{
  for (auto& n : nodes_) {
    if (n->id == node_id) {
      return n->device;
    }
  }
  return nullptr;
}

std::vector<std::string>
Simulation::node_ids() const
{
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    out.push_back(n->id);
  }
  return out;
}

} // namespace reservoir
