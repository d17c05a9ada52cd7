#pragma once

#include "reservoir/fib.hpp"
#include "reservoir/lsh.hpp"
#include "reservoir/rfib.hpp"
#include "reservoir/topology.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace reservoir {

/// Splits [0, 2^k) of every table into consecutive near-equal blocks, one per EN
/// in lexicographic order; the first 2^k mod n blocks get one extra bucket.
/// Entry faces are left at kAppFace; see localize_rfib.
std::vector<RfibEntry>
assign_buckets(const Name& service, std::vector<Name> ens, const HashFamilyConfig& config);

/// Block sizes for `buckets` spread over `n` ENs by the remainder rule.
std::vector<std::uint64_t>
equal_block_sizes(std::uint64_t buckets, std::size_t n);

/// Resizes blocks when max/min load exceeds `skew`. Each table keeps its EN order;
/// EN i's new size is proportional to size_i / (load_i + 1), at least one bucket,
/// apportioned by largest remainder. Returns nullopt when nothing changes.
std::optional<std::vector<RfibEntry>>
rebalance(const Name& service, const std::map<Name, std::uint64_t>& load,
          std::span<const RfibEntry> current, double skew = 2.0);

/// Copies `entries` with each face resolved through `fib` on the EN prefix.
/// Throws NoRouteError when an EN is unreachable.
std::vector<RfibEntry>
localize_rfib(std::span<const RfibEntry> entries, const Fib& fib);

/// Shortest-path FIBs for every node: EN prefixes (flagged), device prefixes,
/// and each service prefix toward its nearest offering EN. Ties on hops break
/// on delay, then on lowest face id. Devices get a default route on their
/// access face and their own prefix on the application face.
std::vector<Fib>
install_routes(const Topology& topo, const std::map<Name, std::vector<Name>>& service_ens);

/// Writes "service,en,table,lo,hi" rows.
void
write_assignments_csv(std::ostream& out, const std::map<Name, std::vector<RfibEntry>>& rfib,
                      bool header = true);

} // namespace reservoir
