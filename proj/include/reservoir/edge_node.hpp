#pragma once

#include "reservoir/application.hpp"
#include "reservoir/reuse_store.hpp"
#include "reservoir/rfib.hpp"
#include "reservoir/timing.hpp"

#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace reservoir {

/// Execution time drawn uniformly from [min, max]; `nominal` seeds TTC estimates.
struct ExecutionModel
{
  Duration min{std::chrono::milliseconds{70}};
  Duration max{std::chrono::milliseconds{100}};
  Duration nominal{std::chrono::milliseconds{85}};
};

/// Per-service EWMA of observed execution durations.
class ServiceStats
{
public:
  explicit ServiceStats(double alpha = 0.125);

  void
  record(const Name& service, Duration observed);

  std::optional<Duration>
  ewma(const Name& service) const;

  std::size_t
  samples(const Name& service) const;

  double
  alpha() const
  {
    return alpha_;
  }

private:
  struct Entry
  {
    double ewma_us = 0.0;
    std::size_t samples = 0;
  };

  double alpha_;
  std::map<Name, Entry> entries_;
};

/// Time-to-completion estimate; the nominal mean until the first sample.
Duration
estimate_ttc(const ServiceStats& stats, const Name& service, Duration nominal);

struct EdgeNodeConfig
{
  Name prefix;
  std::vector<Name> services;
  HashFamilyConfig hash;
  std::size_t store_capacity = 10000;
  std::uint32_t probe_radius = kDefaultProbeRadius;
  ExecutionModel execution;
  double ewma_alpha = 0.125;
  LshTiming timing;
  std::size_t segment_bytes = 8192;
  std::uint32_t max_retransmissions = 3;
  bool push_results = false;
  std::uint64_t seed = 1;
};

/// Name of one segment of a task input served by a device:
/// /<device>/<service>/input/<hash>/<segment>.
Name
input_segment_name(const Name& device_prefix, const Name& service, const std::string& hash_hex,
                   std::uint64_t segment);

/// Name an EN uses to push a result to a device: /<device>/<service>/result/<hash>.
Name
push_result_name(const Name& device_prefix, const Name& service, const std::string& hash_hex);

std::uint64_t
segment_count(std::uint64_t input_size, std::size_t segment_bytes);

/// Edge node: threshold-gated reuse over a multi-table LSH store, execution from
/// scratch with TTC replies, input pulling for large inputs, and result fetches.
class EdgeNode : public Application
{
public:
  explicit EdgeNode(EdgeNodeConfig config);

  void
  on_interest(const Interest& interest, AppContext& ctx) override;

  void
  on_data(const Data& data, AppContext& ctx) override;

  bool
  offers(const Name& service) const;

  /// Nearest probed candidate whose similarity meets `threshold`; refreshes its recency.
  /// Throws ServiceUnknownError for services this EN does not offer.
  std::optional<ReuseCandidate>
  find_reusable(const Name& service, const FeatureVector& input, const ConcatenatedHash& hash,
                double threshold);

  /// Stores an executed task and reports the evicted task, if any.
  std::optional<StoredTask>
  store_result(StoredTask task);

  ReuseStore&
  store(const Name& service);

  const ReuseStore*
  find_store(const Name& service) const;

  const ServiceStats&
  stats() const
  {
    return stats_;
  }

  const EdgeNodeCounters&
  counters() const
  {
    return counters_;
  }

  const EdgeNodeConfig&
  config() const
  {
    return config_;
  }

  /// Bucket ranges currently assigned to this EN, per service (audit only).
  void
  set_assigned_ranges(const Name& service, std::vector<BucketRange> ranges);

  const std::vector<BucketRange>*
  assigned_ranges(const Name& service) const;

private:
  struct PendingExecution
  {
    TaskName task;
    FeatureVector input;
    SimTime ready_time{0};
    bool ready = false;
    TaskResult result;
  };

  struct PullState
  {
    Interest task_interest;
    TaskName task;
    Name device_prefix;
    std::uint64_t total_size = 0;
    std::vector<std::optional<std::vector<std::uint8_t>>> segments;
    std::vector<std::uint32_t> attempts;
    std::size_t received = 0;
    Duration timeout{0};
  };

  void
  handle_task(const Interest& interest, const TaskName& task, AppContext& ctx);

  void
  process_task(const Interest& interest, const TaskName& task, const FeatureVector& input,
               AppContext& ctx);

  void
  start_execution(const Interest& interest, const TaskName& task, const FeatureVector& input,
                  Duration search_delay, AppContext& ctx);

  void
  handle_result_fetch(const Interest& interest, const TaskName& fetch, AppContext& ctx);

  void
  pull_input(const Interest& interest, const TaskName& task, AppContext& ctx);

  void
  send_segment_request(const std::string& key, std::uint64_t segment, AppContext& ctx);

  void
  on_segment_timeout(const std::string& key, std::uint64_t segment, std::uint32_t attempt,
                     AppContext& ctx);

  void
  on_segment(const Data& data, AppContext& ctx);

  void
  fail_task(const Interest& interest, const TaskName& task, const std::string& reason,
            AppContext& ctx);

  void
  log_arrival(AppContext& ctx, const Interest& interest, const TaskName& task,
              const ConcatenatedHash& hash, ArrivalOutcome outcome,
              std::optional<ReuseCandidate> best, std::size_t store_size);

  Duration
  draw_execution_time();

  EdgeNodeConfig config_;
  std::set<Name> services_;
  std::map<Name, ReuseStore> stores_;
  std::map<Name, std::vector<BucketRange>> assigned_;
  ServiceStats stats_;
  std::mt19937_64 rng_;
  /// Keyed by the offload-form task URI.
  std::map<std::string, PendingExecution> pending_;
  std::map<std::string, PullState> pulls_;
  /// Segment name prefix (/<device>/<service>/input/<hash>) to pull key.
  std::map<Name, std::string> pull_by_segment_prefix_;
  EdgeNodeCounters counters_;
};

} // namespace reservoir
