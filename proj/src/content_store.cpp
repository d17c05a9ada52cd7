#include "reservoir/content_store.hpp"

namespace reservoir {

ContentStore::ContentStore(std::size_t capacity)
  : capacity_(capacity)
{
}

const Data*
ContentStore::find(const Name& name)
{
  auto it = index_.find(name);
  if (it == index_.end()) {
    return nullptr;
  }
  lru_.splice(lru_.begin(), lru_, it->second.position);
  return &it->second.data;
}

bool
ContentStore::contains(const Name& name) const
{
  return index_.count(name) > 0;
}

std::optional<Name>
ContentStore::insert(Data data, SimTime now)
{
  if (capacity_ == 0) {
    return std::nullopt;
  }
  auto it = index_.find(data.name);
  if (it != index_.end()) {
    it->second.data = std::move(data);
    it->second.inserted = now;
    lru_.splice(lru_.begin(), lru_, it->second.position);
    return std::nullopt;
  }

  std::optional<Name> evicted;
  if (index_.size() >= capacity_) {
    evicted = lru_.back();
    index_.erase(lru_.back());
    lru_.pop_back();
  }
  lru_.push_front(data.name);
  Name key = data.name;
  index_.emplace(std::move(key), Entry{std::move(data), now, lru_.begin()});
  return evicted;
}

std::vector<Name>
ContentStore::recency_order() const
{
  return {lru_.begin(), lru_.end()};
}

} // namespace reservoir
