#pragma once

#include "reservoir/packet.hpp"

#include <list>
#include <map>
#include <optional>

namespace reservoir {

/// Exact-name Data cache with LRU replacement. Capacity 0 disables caching.
class ContentStore
{
public:
  explicit ContentStore(std::size_t capacity);

  /// Returns the cached Data and marks it most recently used.
  const Data*
  find(const Name& name);

  bool
  contains(const Name& name) const;

  /// Inserts or refreshes; returns the name evicted to make room, if any.
  std::optional<Name>
  insert(Data data, SimTime now);

  std::size_t
  size() const
  {
    return index_.size();
  }

  std::size_t
  capacity() const
  {
    return capacity_;
  }

  /// Names from most to least recently used.
  std::vector<Name>
  recency_order() const;

private:
  struct Entry
  {
    Data data;
    SimTime inserted;
    std::list<Name>::iterator position;
  };

  std::size_t capacity_;
  std::list<Name> lru_; // front is most recent
  std::map<Name, Entry> index_;
};

} // namespace reservoir
