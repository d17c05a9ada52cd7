#pragma once

#include "reservoir/lsh.hpp"
#include "reservoir/name.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace reservoir {

enum class CompletionSource
{
  LocalCs,
  NetworkCs,
  PitAggregate,
  EnReuse,
  EnScratch,
};

inline constexpr CompletionSource kAllCompletionSources[] = {
  CompletionSource::LocalCs,   CompletionSource::NetworkCs, CompletionSource::PitAggregate,
  CompletionSource::EnReuse,   CompletionSource::EnScratch,
};

std::string_view
to_string(CompletionSource s);

/// One finished (or failed) offload, as seen by the device.
struct SessionRecord
{
  InstanceId instance = 0;
  std::string device;
  std::string name;
  SimTime start{0};
  std::optional<SimTime> end;
  std::optional<CompletionSource> source;
  double threshold = 0.0;
  std::optional<Duration> deadline;
  /// Label of the task's own input.
  std::int64_t own_label = 0;
  /// Result returned to the device and the instance whose input produced it.
  std::optional<std::int64_t> result_label;
  InstanceId producer = 0;
  bool failed = false;

  bool
  deadline_missed() const
  {
    return deadline && end && (*end - start) > *deadline;
  }
};

enum class ArrivalOutcome
{
  Reuse,
  Scratch,
  JoinedPending,
  NoReuse,
  Failed,
};

std::string_view
to_string(ArrivalOutcome o);

/// A task reaching an EN, logged when the EN decides what to do with it.
struct EnArrival
{
  SimTime time{0};
  std::string en;
  Name service;
  InstanceId instance = 0;
  ConcatenatedHash hash;
  double threshold = 0.0;
  ArrivalOutcome outcome = ArrivalOutcome::Scratch;
  std::optional<std::uint64_t> reused_id;
  /// Best LSH candidate similarity with no threshold applied.
  std::optional<double> best_similarity;
  std::size_t store_size = 0;
};

struct StoreEvent
{
  SimTime time{0};
  std::string en;
  Name service;
  std::uint64_t stored_id = 0;
  bool inserted = true;
};

using EnLogRecord = std::variant<EnArrival, StoreEvent>;

struct EdgeNodeCounters
{
  std::uint64_t tasks_received = 0;
  std::uint64_t reuse_hits = 0;
  std::uint64_t scratch_executions = 0;
  std::uint64_t joined_pending = 0;
  std::uint64_t evictions = 0;
  std::uint64_t pull_packets = 0;
  std::uint64_t result_fetches = 0;
  std::uint64_t failures = 0;
};

/// Everything a run records for post-processing.
struct RunLog
{
  std::vector<SessionRecord> sessions;
  /// Chronological EN arrivals and store membership changes.
  std::vector<EnLogRecord> en_events;
  std::map<std::string, EdgeNodeCounters> en_counters;
  /// rFIB lookups per offloaded instance, network-wide.
  std::map<InstanceId, std::uint32_t> rfib_lookups;
};

} // namespace reservoir
