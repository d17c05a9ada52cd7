#pragma once

#include "reservoir/lsh.hpp"
#include "reservoir/name.hpp"

#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace reservoir {

struct StoredTask
{
  /// Unique per stored execution; the producing instance id.
  std::uint64_t id = 0;
  Name service;
  FeatureVector input;
  ConcatenatedHash hash;
  /// Execution result (the input's label).
  std::int64_t result = 0;
  SimTime stored_at{0};
};

struct ReuseCandidate
{
  const StoredTask* task = nullptr;
  double similarity = -1.0;
};

/// Multi-table LSH store of executed tasks for one service. Every stored task
/// sits in exactly one bucket per table; eviction is global LRU and removes the
/// task from all tables at once.
class ReuseStore
{
public:
  ReuseStore(std::uint32_t num_tables, std::uint32_t bits_per_table, std::size_t capacity);

  /// Stores the task in its own bucket of every table. Returns the evicted task, if any.
  /// Re-inserting an existing id refreshes its recency only.
  std::optional<StoredTask>
  insert(StoredTask task);

  /// Best candidate among the probed buckets of every table, without any
  /// threshold. Ties on similarity go to the most recently stored task.
  /// Does not touch recency.
  std::optional<ReuseCandidate>
  nearest(const FeatureVector& query, const ConcatenatedHash& hash,
          std::uint32_t probe_radius) const;

  /// Marks a task most recently used.
  void
  touch(std::uint64_t id);

  bool
  contains(std::uint64_t id) const
  {
    return tasks_.count(id) > 0;
  }

  const StoredTask*
  get(std::uint64_t id) const;

  /// Number of table slots referencing `id` (0 or num_tables when consistent).
  std::size_t
  slot_count(std::uint64_t id) const;

  std::size_t
  size() const
  {
    return tasks_.size();
  }

  std::size_t
  capacity() const
  {
    return capacity_;
  }

  std::uint32_t
  num_tables() const
  {
    return static_cast<std::uint32_t>(tables_.size());
  }

  std::uint32_t
  bits_per_table() const
  {
    return bits_per_table_;
  }

  /// Stored tasks in id order.
  std::vector<const StoredTask*>
  all() const;

  /// Ids from least to most recently used.
  std::vector<std::uint64_t>
  lru_order() const;

private:
  struct Slot
  {
    StoredTask task;
    std::list<std::uint64_t>::iterator lru_position;
  };

  void
  remove(std::uint64_t id);

  std::uint32_t bits_per_table_;
  std::size_t capacity_;
  std::map<std::uint64_t, Slot> tasks_;
  std::list<std::uint64_t> lru_; // front is least recent
  /// tables_[t][bucket] holds ids in insertion order.
  std::vector<std::unordered_map<std::uint32_t, std::vector<std::uint64_t>>> tables_;
};

} // namespace reservoir
