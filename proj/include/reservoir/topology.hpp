#pragma once

#include "reservoir/name.hpp"

#include <optional>
#include <string>
#include <vector>

namespace reservoir {

enum class NodeKind
{
  Router,
  Device,
};

struct TopoNode
{
  std::string id;
  NodeKind kind = NodeKind::Router;
  /// Set on routers hosting a co-located EN.
  std::optional<Name> en_prefix;
  /// Set on devices.
  std::optional<Name> device_prefix;
};

struct TopoLink
{
  std::size_t a = 0;
  std::size_t b = 0;
  Duration delay{0};
};

/// One side of a link as seen from a node. Faces are numbered from 1 in the
/// order links are listed; face 0 is the local application.
struct Adjacency
{
  std::size_t neighbor = 0;
  FaceId face = 0;
  FaceId peer_face = 0;
  Duration delay{0};
};

struct PathCost
{
  std::uint32_t hops = 0;
  Duration delay{0};
  bool reachable = false;

  friend auto
  operator<=>(const PathCost&, const PathCost&) = default;
};

struct Topology
{
  std::vector<TopoNode> nodes;
  std::vector<TopoLink> links;

  std::size_t
  add_node(TopoNode node);

  void
  add_link(std::size_t a, std::size_t b, Duration delay);

  /// adjacency()[node] in face order.
  std::vector<std::vector<Adjacency>>
  adjacency() const;

  /// Throws ConfigError unless the graph is connected, links are valid and every
  /// device has exactly one link, to a router.
  void
  validate() const;

  std::vector<std::size_t>
  en_nodes() const;

  std::vector<std::size_t>
  device_nodes() const;

  std::vector<std::size_t>
  router_nodes() const;

  std::optional<std::size_t>
  find(const std::string& id) const;

  /// Node owning an EN or device prefix.
  std::optional<std::size_t>
  owner_of(const Name& prefix) const;
};

/// Costs from every node to `dst`, ordered by hop count then total delay.
std::vector<PathCost>
shortest_costs(const Topology& topo, std::size_t dst);

struct TopologyParams
{
  std::size_t routers = 20;
  std::size_t ens = 10;
  std::size_t devices = 20;
  /// Edges added per new node in preferential attachment.
  std::size_t attachment = 2;
  Duration link_delay{std::chrono::milliseconds{5}};
  Duration access_delay{std::chrono::milliseconds{2}};
  std::uint64_t seed = 1;
};

/// Preferential-attachment graph over `routers` nodes, seeded with a clique of
/// attachment+1 nodes. ENs sit on randomly chosen routers; each device attaches
/// to a uniformly chosen router. Routers are r<i>, devices d<i>, EN prefixes
/// /edge/EN<ii> and device prefixes /dev/<iii>.
Topology
generate_topology(const TopologyParams& params);

} // namespace reservoir
