#include "reservoir/control.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>

namespace reservoir {

std::vector<std::uint64_t>
equal_block_sizes(std::uint64_t buckets, std::size_t n)
{
  if (n == 0) {
    throw ConfigError("no ENs to assign buckets to");
  }
  if (buckets < n) {
    throw ConfigError(fmt::format("{} buckets cannot cover {} ENs", buckets, n));
  }
  std::vector<std::uint64_t> sizes(n, buckets / n);
  for (std::size_t i = 0; i < buckets % n; ++i) {
    ++sizes[i];
  }
  return sizes;
}

std::vector<RfibEntry>
assign_buckets(const Name& service, std::vector<Name> ens, const HashFamilyConfig& config)
{
  config.validate();
  if (ens.empty()) {
    throw ConfigError("service " + service.to_uri() + " has no EN");
  }
  std::sort(ens.begin(), ens.end(),
            [](const Name& a, const Name& b) { return a.to_uri() < b.to_uri(); });
  if (std::adjacent_find(ens.begin(), ens.end()) != ens.end()) {
    throw ConfigError("duplicate EN for service " + service.to_uri());
  }
  const std::uint64_t buckets = std::uint64_t{1} << config.bits_per_table;
  const auto sizes = equal_block_sizes(buckets, ens.size());

  std::vector<RfibEntry> out;
  std::uint64_t lo = 0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    RfibEntry e;
    e.service = service;
    e.en_prefix = ens[i];
    e.index_size_bytes = config.index_size_bytes;
    e.bits_per_table = config.bits_per_table;
    e.bucket_ranges.assign(config.num_tables, BucketRange{lo, lo + sizes[i] - 1});
    lo += sizes[i];
    out.push_back(std::move(e));
  }
  validate_partition(out);
  return out;
}

namespace {

std::vector<std::uint64_t>
apportion(std::uint64_t total, const std::vector<double>& weights)
{
  const std::size_t n = weights.size();
  std::vector<std::uint64_t> sizes(n, 1);
  const std::uint64_t spare = total - n;
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::uint64_t given = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double quota = sum > 0 ? static_cast<double>(spare) * weights[i] / sum
                                 : static_cast<double>(spare) / static_cast<double>(n);
    const auto whole = static_cast<std::uint64_t>(quota);
    sizes[i] += whole;
    given += whole;
    remainders.emplace_back(quota - static_cast<double>(whole), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; given < spare; ++r, ++given) {
    ++sizes[remainders[r % n].second];
  }
  return sizes;
}

} // namespace

std::optional<std::vector<RfibEntry>>
rebalance(const Name& service, const std::map<Name, std::uint64_t>& load,
          std::span<const RfibEntry> current, double skew)
{
  if (current.size() < 2) {
    return std::nullopt;
  }
  validate_partition(current);
  std::vector<std::uint64_t> loads;
  for (const auto& e : current) {
    auto it = load.find(e.en_prefix);
    loads.push_back(it == load.end() ? 0 : it->second);
  }
  const auto [mn, mx] = std::minmax_element(loads.begin(), loads.end());
  if (*mx == 0) {
    return std::nullopt;
  }
  if (*mn > 0 && static_cast<double>(*mx) / static_cast<double>(*mn) <= skew) {
    return std::nullopt;
  }

  std::vector<RfibEntry> next(current.begin(), current.end());
  const std::uint64_t buckets = std::uint64_t{1} << current.front().bits_per_table;
  const std::size_t tables = current.front().bucket_ranges.size();
  for (std::size_t t = 0; t < tables; ++t) {
    std::vector<std::size_t> order(current.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return current[a].bucket_ranges[t].lo < current[b].bucket_ranges[t].lo;
    });
    std::vector<double> weights;
    for (auto i : order) {
      weights.push_back(static_cast<double>(current[i].bucket_ranges[t].size()) /
                        static_cast<double>(loads[i] + 1));
    }
    const auto sizes = apportion(buckets, weights);
    std::uint64_t lo = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      next[order[k]].bucket_ranges[t] = {lo, lo + sizes[k] - 1};
      lo += sizes[k];
    }
  }
  validate_partition(next);
  bool changed = false;
  for (std::size_t i = 0; i < next.size(); ++i) {
    changed = changed || next[i].bucket_ranges != current[i].bucket_ranges;
  }
  (void)service;
  if (!changed) {
    return std::nullopt;
  }
  return next;
}

std::vector<RfibEntry>
localize_rfib(std::span<const RfibEntry> entries, const Fib& fib)
{
  std::vector<RfibEntry> out(entries.begin(), entries.end());
  for (auto& e : out) {
    const auto* match = fib.find_exact(e.en_prefix);
    if (match == nullptr || match->faces.empty()) {
      throw NoRouteError("no route to " + e.en_prefix.to_uri());
    }
    e.face = match->faces.front();
  }
  return out;
}

namespace {

/// Face at `node` toward `dst`, or kAppFace when node == dst.
FaceId
next_hop(const std::vector<std::vector<Adjacency>>& adj, const std::vector<PathCost>& cost,
         std::size_t node, std::size_t dst, const Topology& topo)
{
  if (node == dst) {
    return kAppFace;
  }
  const auto& c = cost[node];
  std::optional<FaceId> best;
  for (const auto& a : adj[node]) {
    const auto& n = cost[a.neighbor];
    if (!n.reachable) {
      continue;
    }
    if (topo.nodes[a.neighbor].kind == NodeKind::Device && a.neighbor != dst) {
      continue;
    }
    if (n.hops + 1 == c.hops && n.delay + a.delay == c.delay) {
      if (!best || a.face < *best) {
        best = a.face;
      }
    }
  }
  if (!best) {
    throw ConfigError("no next hop from " + topo.nodes[node].id + " to " + topo.nodes[dst].id);
  }
  return *best;
}

} // namespace

std::vector<Fib>
install_routes(const Topology& topo, const std::map<Name, std::vector<Name>>& service_ens)
{
  topo.validate();
  const auto adj = topo.adjacency();
  std::vector<Fib> fibs(topo.nodes.size());

  std::map<Name, std::vector<PathCost>> cost_to;
  auto costs = [&](std::size_t dst) -> const std::vector<PathCost>& {
    const Name& key = topo.nodes[dst].en_prefix ? *topo.nodes[dst].en_prefix
                                                : *topo.nodes[dst].device_prefix;
    auto it = cost_to.find(key);
    if (it == cost_to.end()) {
      it = cost_to.emplace(key, shortest_costs(topo, dst)).first;
    }
    return it->second;
  };

  for (std::size_t dst = 0; dst < topo.nodes.size(); ++dst) {
    const auto& node = topo.nodes[dst];
    if (!node.en_prefix && !node.device_prefix) {
      continue;
    }
    const auto& c = costs(dst);
    const Name prefix = node.en_prefix ? *node.en_prefix : *node.device_prefix;
    for (std::size_t u = 0; u < topo.nodes.size(); ++u) {
      if (topo.nodes[u].kind == NodeKind::Device && u != dst) {
        continue;
      }
      if (!c[u].reachable) {
        throw ConfigError("node '" + topo.nodes[u].id + "' cannot reach " + prefix.to_uri());
      }
      fibs[u].insert(prefix, {next_hop(adj, c, u, dst, topo)}, node.en_prefix.has_value());
    }
  }

  for (const auto& [service, ens] : service_ens) {
    std::vector<std::size_t> hosts;
    for (const auto& en : ens) {
      auto owner = topo.owner_of(en);
      if (!owner || !topo.nodes[*owner].en_prefix) {
        throw ConfigError("service " + service.to_uri() + " names unknown EN " + en.to_uri());
      }
      hosts.push_back(*owner);
    }
    for (std::size_t u = 0; u < topo.nodes.size(); ++u) {
      if (topo.nodes[u].kind == NodeKind::Device) {
        continue;
      }
      std::optional<std::size_t> best;
      for (auto h : hosts) {
        if (!best) {
          best = h;
          continue;
        }
        const auto& a = costs(h)[u];
        const auto& b = costs(*best)[u];
        const auto ka = std::tuple(a.hops, a.delay, topo.nodes[h].en_prefix->to_uri());
        const auto kb = std::tuple(b.hops, b.delay, topo.nodes[*best].en_prefix->to_uri());
        if (ka < kb) {
          best = h;
        }
      }
      if (best) {
        fibs[u].insert(service, {next_hop(adj, costs(*best), u, *best, topo)});
      }
    }
  }

  for (std::size_t d : topo.device_nodes()) {
    fibs[d].insert(Name("/"), {adj[d].front().face});
    fibs[d].insert(*topo.nodes[d].device_prefix, {kAppFace});
  }
  return fibs;
}

void
write_assignments_csv(std::ostream& out, const std::map<Name, std::vector<RfibEntry>>& rfib,
                      bool header)
{
  if (header) {
    out << "service,en,table,lo,hi\n";
  }
  for (const auto& [service, entries] : rfib) {
    for (const auto& e : entries) {
      for (std::size_t t = 0; t < e.bucket_ranges.size(); ++t) {
        out << fmt::format("{},{},{},{},{}\n", service.to_uri(), e.en_prefix.to_uri(), t,
                           e.bucket_ranges[t].lo, e.bucket_ranges[t].hi);
      }
    }
  }
}

} // namespace reservoir
