#pragma once

#include "reservoir/name.hpp"

#include <map>
#include <vector>

namespace reservoir {

struct FibEntry
{
  Name prefix;
  std::vector<FaceId> faces;
  /// Set for EN prefixes; used to recognize result-fetch names.
  bool edge_node = false;
};

class Fib
{
public:
  /// Adds or replaces the entry for `prefix`.
  void
  insert(const Name& prefix, std::vector<FaceId> faces, bool edge_node = false);

  void
  erase(const Name& prefix);

  /// Longest-prefix match over whole components. The root prefix "/" matches everything.
  const FibEntry*
  longest_prefix_match(const Name& name) const;

  const FibEntry*
  find_exact(const Name& prefix) const;

  /// Prefixes registered with edge_node set, in name order.
  const std::vector<Name>&
  edge_node_prefixes() const
  {
    return edge_node_prefixes_;
  }

  std::size_t
  size() const
  {
    return entries_.size();
  }

  const std::map<Name, FibEntry>&
  entries() const
  {
    return entries_;
  }

private:
  void
  refresh_edge_node_prefixes();

  std::map<Name, FibEntry> entries_;
  std::vector<Name> edge_node_prefixes_;
};

} // namespace reservoir
