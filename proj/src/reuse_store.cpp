#include "reservoir/reuse_store.hpp"

#include <algorithm>
#include <unordered_set>

namespace reservoir {

ReuseStore::ReuseStore(std::uint32_t num_tables, std::uint32_t bits_per_table, std::size_t capacity)
  : bits_per_table_(bits_per_table)
  , capacity_(capacity)
  , tables_(num_tables)
{
  if (num_tables == 0) {
    throw ConfigError("reuse store needs at least one table");
  }
}

std::optional<StoredTask>
ReuseStore::insert(StoredTask task)
{
  if (task.hash.num_tables() != tables_.size()) {
    throw ConfigError("stored task hash has " + std::to_string(task.hash.num_tables()) +
                      " tables, store has " + std::to_string(tables_.size()));
  }
  if (capacity_ == 0) {
    return std::nullopt;
  }
  if (contains(task.id)) {
    touch(task.id);
    return std::nullopt;
  }

  std::optional<StoredTask> evicted;
  if (tasks_.size() >= capacity_) {
    const std::uint64_t victim = lru_.front();
    evicted = tasks_.at(victim).task;
    remove(victim);
  }

  const std::uint64_t id = task.id;
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    tables_[t][task.hash.per_table[t]].push_back(id);
  }
  lru_.push_back(id);
  tasks_.emplace(id, Slot{std::move(task), std::prev(lru_.end())});
  return evicted;
}

void
ReuseStore::remove(std::uint64_t id)
{
  auto it = tasks_.find(id);
  if (it == tasks_.end()) {
    return;
  }
  const auto& hash = it->second.task.hash;
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    auto bucket = tables_[t].find(hash.per_table[t]);
    if (bucket == tables_[t].end()) {
      continue;
    }
    std::erase(bucket->second, id);
    if (bucket->second.empty()) {
      tables_[t].erase(bucket);
    }
  }
  lru_.erase(it->second.lru_position);
  tasks_.erase(it);
}

void
ReuseStore::touch(std::uint64_t id)
{
  auto it = tasks_.find(id);
  if (it != tasks_.end()) {
    lru_.splice(lru_.end(), lru_, it->second.lru_position);
  }
}

const StoredTask*
ReuseStore::get(std::uint64_t id) const
{
  auto it = tasks_.find(id);
  return it == tasks_.end() ? nullptr : &it->second.task;
}

std::optional<ReuseCandidate>
ReuseStore::nearest(const FeatureVector& query, const ConcatenatedHash& hash,
                    std::uint32_t probe_radius) const
{
  if (hash.num_tables() != tables_.size()) {
    throw ConfigError("query hash table count does not match the store");
  }
  std::optional<ReuseCandidate> best;
  std::unordered_set<std::uint64_t> seen;
  for (std::uint32_t t = 0; t < tables_.size(); ++t) {
    for (const BucketIndex& probe : probe_set(hash.at(t), probe_radius, bits_per_table_)) {
      auto bucket = tables_[t].find(probe.index);
      if (bucket == tables_[t].end()) {
        continue;
      }
      for (std::uint64_t id : bucket->second) {
        if (!seen.insert(id).second) {
          continue;
        }
        const StoredTask& candidate = tasks_.at(id).task;
        const double sim = cosine_similarity(query, candidate.input);
        const bool better =
          !best || sim > best->similarity ||
          (sim == best->similarity &&
           (candidate.stored_at > best->task->stored_at ||
            (candidate.stored_at == best->task->stored_at && candidate.id > best->task->id)));
        if (better) {
          best = ReuseCandidate{&candidate, sim};
        }
      }
    }
  }
  return best;
}

std::size_t
ReuseStore::slot_count(std::uint64_t id) const
{
  std::size_t n = 0;
  for (const auto& table : tables_) {
    for (const auto& [bucket, ids] : table) {
      n += static_cast<std::size_t>(std::count(ids.begin(), ids.end(), id));
    }
  }
  return n;
}

std::vector<const StoredTask*>
ReuseStore::all() const
{
  std::vector<const StoredTask*> out;
  out.reserve(tasks_.size());
  for (const auto& [id, slot] : tasks_) {
    out.push_back(&slot.task);
  }
  return out;
}

std::vector<std::uint64_t>
ReuseStore::lru_order() const
{
  return {lru_.begin(), lru_.end()};
}

} // namespace reservoir
