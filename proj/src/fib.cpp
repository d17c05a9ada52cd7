#include "reservoir/fib.hpp"

namespace reservoir {

void
Fib::insert(const Name& prefix, std::vector<FaceId> faces, bool edge_node)
{
  entries_.insert_or_assign(prefix, FibEntry{prefix, std::move(faces), edge_node});
  refresh_edge_node_prefixes();
}

void
Fib::erase(const Name& prefix)
{
  entries_.erase(prefix);
  refresh_edge_node_prefixes();
}

const FibEntry*
Fib::longest_prefix_match(const Name& name) const
{
  for (std::size_t len = name.size() + 1; len-- > 0;) {
    auto it = entries_.find(name.prefix(len));
    if (it != entries_.end() && !it->second.faces.empty()) {
      return &it->second;
    }
  }
  return nullptr;
}

const FibEntry*
Fib::find_exact(const Name& prefix) const
{
  auto it = entries_.find(prefix);
  return it == entries_.end() ? nullptr : &it->second;
}

void
Fib::refresh_edge_node_prefixes()
{
  edge_node_prefixes_.clear();
  for (const auto& [prefix, entry] : entries_) {
    if (entry.edge_node) {
      edge_node_prefixes_.push_back(prefix);
    }
  }
}

} // namespace reservoir
