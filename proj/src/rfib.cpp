#include "reservoir/rfib.hpp"

#include "reservoir/lsh.hpp"

#include <algorithm>

namespace reservoir {

void
validate_partition(std::span<const RfibEntry> entries)
{
  if (entries.empty()) {
    throw ConfigError("rFIB service has no entries");
  }
  const RfibEntry& first = entries.front();
  const std::string service = first.service.to_uri();
  if (first.bits_per_table < 1 || first.bits_per_table > 32) {
    throw ConfigError("rFIB " + service + ": bits_per_table must be in [1, 32]");
  }
  if (first.index_size_bytes != index_size_for_bits(first.bits_per_table)) {
    throw ConfigError("rFIB " + service + ": index size " + std::to_string(first.index_size_bytes) +
                      " bytes does not fit " + std::to_string(first.bits_per_table) + "-bit indices");
  }
  const std::size_t tables = first.bucket_ranges.size();
  if (tables == 0) {
    throw ConfigError("rFIB " + service + ": entries carry no bucket ranges");
  }
  const std::uint64_t space = std::uint64_t{1} << first.bits_per_table;

  for (const RfibEntry& e : entries) {
    if (e.service != first.service || e.bits_per_table != first.bits_per_table ||
        e.index_size_bytes != first.index_size_bytes || e.bucket_ranges.size() != tables) {
      throw ConfigError("rFIB " + service + ": entry for " + e.en_prefix.to_uri() +
                        " disagrees on service, widths, or table count");
    }
    for (const BucketRange& r : e.bucket_ranges) {
      if (r.lo > r.hi || r.hi >= space) {
        throw ConfigError("rFIB " + service + ": entry for " + e.en_prefix.to_uri() +
                          " has an invalid range [" + std::to_string(r.lo) + ", " +
                          std::to_string(r.hi) + "]");
      }
    }
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      if (entries[i].en_prefix == entries[j].en_prefix) {
        throw ConfigError("rFIB " + service + ": duplicate EN " + entries[i].en_prefix.to_uri());
      }
    }
  }

  for (std::size_t t = 0; t < tables; ++t) {
    std::vector<BucketRange> ranges;
    for (const RfibEntry& e : entries) {
      ranges.push_back(e.bucket_ranges[t]);
    }
    std::sort(ranges.begin(), ranges.end(),
              [](const BucketRange& a, const BucketRange& b) { return a.lo < b.lo; });
    std::uint64_t expected = 0;
    for (const BucketRange& r : ranges) {
      if (r.lo < expected) {
        throw ConfigError("rFIB " + service + ": table " + std::to_string(t) +
                          " has overlapping ranges at bucket " + std::to_string(r.lo));
      }
      if (r.lo > expected) {
        throw ConfigError("rFIB " + service + ": table " + std::to_string(t) +
                          " leaves buckets [" + std::to_string(expected) + ", " +
                          std::to_string(r.lo - 1) + "] uncovered");
      }
      expected = r.hi + 1;
    }
    if (expected != space) {
      throw ConfigError("rFIB " + service + ": table " + std::to_string(t) +
                        " leaves buckets [" + std::to_string(expected) + ", " +
                        std::to_string(space - 1) + "] uncovered");
    }
  }
}

void
Rfib::install(const Name& service, std::vector<RfibEntry> entries)
{
  for (const RfibEntry& e : entries) {
    if (e.service != service) {
      throw ConfigError("rFIB entry for " + e.service.to_uri() + " installed under " +
                        service.to_uri());
    }
  }
  validate_partition(entries);
  by_service_.insert_or_assign(service, std::move(entries));
}

std::span<const RfibEntry>
Rfib::entries_for(const Name& service) const
{
  auto it = by_service_.find(service);
  if (it == by_service_.end()) {
    return {};
  }
  return it->second;
}

std::vector<Name>
Rfib::services() const
{
  std::vector<Name> out;
  for (const auto& [service, entries] : by_service_) {
    out.push_back(service);
  }
  return out;
}

std::size_t
Rfib::size() const
{
  std::size_t n = 0;
  for (const auto& [service, entries] : by_service_) {
    n += entries.size();
  }
  return n;
}

RfibMatch
rfib_select(const Rfib& rfib, const TaskName& name)
{
  auto entries = rfib.entries_for(name.service);
  if (entries.empty()) {
    throw NoRouteError("no rFIB entries for service " + name.service.to_uri());
  }
  const RfibEntry& first = entries.front();
  const auto hash = decode_hash(name.hash_hex, first.index_size_bytes,
                                static_cast<std::uint32_t>(first.bucket_ranges.size()));

  const RfibEntry* best = nullptr;
  std::uint32_t best_count = 0;
  std::string best_uri;
  for (const RfibEntry& e : entries) {
    std::uint32_t count = 0;
    for (std::size_t t = 0; t < e.bucket_ranges.size(); ++t) {
      if (e.bucket_ranges[t].contains(hash.per_table[t])) {
        ++count;
      }
    }
    std::string uri = e.en_prefix.to_uri();
    if (best == nullptr || count > best_count || (count == best_count && uri < best_uri)) {
      best = &e;
      best_count = count;
      best_uri = std::move(uri);
    }
  }
  return {best->en_prefix, best->face, best_count};
}

} // namespace reservoir
