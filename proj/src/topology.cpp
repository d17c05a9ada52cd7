#include "reservoir/topology.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <queue>
#include <random>
#include <set>

namespace reservoir {

std::size_t
Topology::add_node(TopoNode node)
{
  nodes.push_back(std::move(node));
  return nodes.size() - 1;
}

void
Topology::add_link(std::size_t a, std::size_t b, Duration delay)
{
  links.push_back({a, b, delay});
}

std::vector<std::vector<Adjacency>>
Topology::adjacency() const
{
  std::vector<std::vector<Adjacency>> adj(nodes.size());
  for (const auto& l : links) {
    const auto fa = static_cast<FaceId>(adj.at(l.a).size() + 1);
    const auto fb = static_cast<FaceId>(adj.at(l.b).size() + 1);
    adj[l.a].push_back({l.b, fa, fb, l.delay});
    adj[l.b].push_back({l.a, fb, fa, l.delay});
  }
  return adj;
}

void
Topology::validate() const
{
  if (nodes.empty()) {
    throw ConfigError("topology has no nodes");
  }
  std::set<std::string> ids;
  for (const auto& n : nodes) {
    if (!ids.insert(n.id).second) {
      throw ConfigError("duplicate node id '" + n.id + "'");
    }
    if (n.kind == NodeKind::Device && !n.device_prefix) {
      throw ConfigError("device '" + n.id + "' has no prefix");
    }
    if (n.kind == NodeKind::Device && n.en_prefix) {
      throw ConfigError("device '" + n.id + "' cannot host an EN");
    }
  }
  for (const auto& l : links) {
    if (l.a >= nodes.size() || l.b >= nodes.size() || l.a == l.b) {
      throw ConfigError("invalid link");
    }
    if (l.delay < Duration{0}) {
      throw ConfigError("negative link delay");
    }
  }
  const auto adj = adjacency();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind != NodeKind::Device) {
      continue;
    }
    if (adj[i].size() != 1 || nodes[adj[i][0].neighbor].kind != NodeKind::Router) {
      throw ConfigError("device '" + nodes[i].id + "' must have exactly one access link to a router");
    }
  }
  std::vector<bool> seen(nodes.size(), false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (const auto& a : adj[u]) {
      if (!seen[a.neighbor]) {
        seen[a.neighbor] = true;
        q.push(a.neighbor);
      }
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!seen[i]) {
      throw ConfigError("node '" + nodes[i].id + "' is disconnected");
    }
  }
}

std::vector<std::size_t>
Topology::en_nodes() const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].en_prefix) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<std::size_t>
Topology::device_nodes() const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind == NodeKind::Device) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<std::size_t>
Topology::router_nodes() const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind == NodeKind::Router) {
      out.push_back(i);
    }
  }
  return out;
}

std::optional<std::size_t>
Topology::find(const std::string& id) const
{
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) {
      return i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t>
Topology::owner_of(const Name& prefix) const
{
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if ((nodes[i].en_prefix && *nodes[i].en_prefix == prefix) ||
        (nodes[i].device_prefix && *nodes[i].device_prefix == prefix)) {
      return i;
    }
  }
  return std::nullopt;
}

std::vector<PathCost>
shortest_costs(const Topology& topo, std::size_t dst)
{
  const auto adj = topo.adjacency();
  std::vector<PathCost> cost(topo.nodes.size());
  using Item = std::pair<PathCost, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  cost.at(dst) = {0, Duration{0}, true};
  pq.push({cost[dst], dst});
  while (!pq.empty()) {
    auto [c, u] = pq.top();
    pq.pop();
    if (c != cost[u]) {
      continue;
    }
    for (const auto& a : adj[u]) {
      // Devices are leaves and never carry transit traffic.
      if (topo.nodes[u].kind == NodeKind::Device && u != dst) {
        break;
      }
      PathCost next{c.hops + 1, c.delay + a.delay, true};
      auto& cur = cost[a.neighbor];
      if (!cur.reachable || std::pair(next.hops, next.delay) < std::pair(cur.hops, cur.delay)) {
        cur = next;
        pq.push({next, a.neighbor});
      }
    }
  }
  return cost;
}

Topology
generate_topology(const TopologyParams& p)
{
  const std::size_t m = p.attachment;
  if (m == 0) {
    throw ConfigError("attachment must be at least 1");
  }
  if (p.routers < m + 1) {
    throw ConfigError(fmt::format("need at least {} routers for attachment {}", m + 1, m));
  }
  if (p.ens > p.routers) {
    throw ConfigError("more ENs than routers");
  }

  std::mt19937_64 rng(p.seed);
  Topology t;
  for (std::size_t i = 0; i < p.routers; ++i) {
    t.add_node({fmt::format("r{}", i), NodeKind::Router, std::nullopt, std::nullopt});
  }

  // Each endpoint appears once per incident edge, so uniform picks are degree-proportional.
  std::vector<std::size_t> endpoints;
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = i + 1; j <= m; ++j) {
      t.add_link(i, j, p.link_delay);
      endpoints.push_back(i);
      endpoints.push_back(j);
    }
  }
  for (std::size_t v = m + 1; v < p.routers; ++v) {
    std::set<std::size_t> targets;
    while (targets.size() < m) {
      std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
      targets.insert(endpoints[pick(rng)]);
    }
    for (auto u : targets) {
      t.add_link(u, v, p.link_delay);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }

  std::vector<std::size_t> order(p.routers);
  for (std::size_t i = 0; i < p.routers; ++i) {
    order[i] = i;
  }
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> hosts(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p.ens));
  std::sort(hosts.begin(), hosts.end());
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    t.nodes[hosts[i]].en_prefix = Name(fmt::format("/edge/EN{:02}", i + 1));
  }

  std::uniform_int_distribution<std::size_t> pick_router(0, p.routers - 1);
  for (std::size_t d = 0; d < p.devices; ++d) {
    const auto attach = pick_router(rng);
    const auto id = t.add_node({fmt::format("d{}", d), NodeKind::Device, std::nullopt,
                                Name(fmt::format("/dev/{:03}", d))});
    t.add_link(id, attach, p.access_delay);
  }
  return t;
}

} // namespace reservoir
