#pragma once

#include "reservoir/name.hpp"

#include <map>
#include <span>
#include <vector>

namespace reservoir {

/// Inclusive range of bucket indices.
struct BucketRange
{
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool
  contains(std::uint64_t index) const
  {
    return lo <= index && index <= hi;
  }

  std::uint64_t
  size() const
  {
    return hi - lo + 1;
  }

  friend bool
  operator==(const BucketRange&, const BucketRange&) = default;
};

/// Reuse-FIB entry: the consecutive block of buckets per table one EN handles for a service.
struct RfibEntry
{
  Name service;
  Name en_prefix;
  FaceId face = kAppFace;
  std::uint32_t index_size_bytes = 1;
  std::uint32_t bits_per_table = 8;
  /// One range per table.
  std::vector<BucketRange> bucket_ranges;
};

/// Throws ConfigError unless the entries cover each table's [0, 2^k) exactly
/// once with one contiguous range per EN, and agree on widths.
void
validate_partition(std::span<const RfibEntry> entries);

class Rfib
{
public:
  /// Replaces all entries of `service` after validating the partition.
  void
  install(const Name& service, std::vector<RfibEntry> entries);

  void
  clear()
  {
    by_service_.clear();
  }

  bool
  empty() const
  {
    return by_service_.empty();
  }

  bool
  has_service(const Name& service) const
  {
    return by_service_.count(service) > 0;
  }

  /// Empty span for unknown services.
  std::span<const RfibEntry>
  entries_for(const Name& service) const;

  std::vector<Name>
  services() const;

  std::size_t
  size() const;

private:
  std::map<Name, std::vector<RfibEntry>> by_service_;
};

struct RfibMatch
{
  Name en_prefix;
  FaceId face = kAppFace;
  /// Number of tables whose indexed bucket the chosen EN handles.
  std::uint32_t matched_tables = 0;
};

/// Majority vote over tables; ties go to the lexicographically smallest EN prefix.
/// Throws NoRouteError for unknown services, MalformedNameError on hash width mismatch.
RfibMatch
rfib_select(const Rfib& rfib, const TaskName& name);

} // namespace reservoir
