#pragma once

#include "reservoir/reuse_store.hpp"
#include "reservoir/run_log.hpp"
#include "reservoir/workload.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace reservoir {

struct SourceStats
{
  std::size_t count = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
};

struct AccuracyStats
{
  std::size_t reused = 0;
  std::size_t correct = 0;

  /// Absent when nothing was reused.
  std::optional<double>
  accuracy() const
  {
    if (reused == 0) {
      return std::nullopt;
    }
    return static_cast<double>(correct) / static_cast<double>(reused);
  }
};

struct ForwardingErrorStats
{
  /// Tasks that reached an EN.
  std::size_t arrivals = 0;
  /// Scratch executions while another EN held a candidate meeting the task's
  /// threshold in one of the task's own LSH buckets.
  std::size_t errors = 0;
  /// Scratch executions while another EN held any stored task meeting the threshold.
  std::size_t similar_elsewhere = 0;

  double
  rate() const
  {
    return arrivals == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(arrivals);
  }

  double
  similar_elsewhere_rate() const
  {
    return arrivals == 0 ? 0.0
                         : static_cast<double>(similar_elsewhere) / static_cast<double>(arrivals);
  }
};

struct RecallStats
{
  std::size_t queries = 0;
  std::size_t hits = 0;

  std::optional<double>
  recall() const
  {
    if (queries == 0) {
      return std::nullopt;
    }
    return static_cast<double>(hits) / static_cast<double>(queries);
  }
};

struct CompletionRatios
{
  /// Mean scratch time over mean CS-reuse time (local and network CS).
  std::optional<double> scratch_over_cs;
  /// Mean scratch time over mean EN-reuse time.
  std::optional<double> scratch_over_en;
};

struct MetricsReport
{
  std::size_t sessions = 0;
  std::size_t finished = 0;
  std::size_t failed = 0;
  std::size_t deadline_missed = 0;
  std::map<CompletionSource, SourceStats> completion;
  /// Share of finished sessions per source, in percent.
  std::map<CompletionSource, double> breakdown_pct;
  /// Finished sessions not executed from scratch for themselves, in percent.
  double percent_reuse = 0.0;
  AccuracyStats accuracy;
  std::map<CompletionSource, AccuracyStats> accuracy_by_source;
  std::map<double, AccuracyStats> accuracy_by_threshold;
  ForwardingErrorStats forwarding;
  RecallStats recall;
  std::map<std::string, EdgeNodeCounters> en_load;
  CompletionRatios ratios;
  std::uint64_t rfib_lookups = 0;
  std::size_t rfib_instances = 0;
  std::uint32_t max_rfib_lookups_per_instance = 0;
};

/// Fraction of reused sessions whose result label equals their own input's
/// label. A session counts as reused when its result came from another instance.
AccuracyStats
reuse_accuracy(std::span<const SessionRecord> sessions);

/// Replays EN arrivals and store changes against brute force over all EN stores.
ForwardingErrorStats
forwarding_error_rate(const RunLog& log, const Workload& workload);

/// Run-time recall: share of EN arrivals (non-empty store) where the LSH
/// candidate's similarity equals the brute-force best over that EN's store.
RecallStats
replay_recall(const RunLog& log, const Workload& workload);

/// Share of queries whose LSH candidate (probing `radius`) has the similarity
/// of the brute-force nearest stored task.
RecallStats
lsh_recall(const ReuseStore& store, const HashFamily& family,
           std::span<const FeatureVector> queries, std::uint32_t radius);

SourceStats
summarize_ms(std::vector<double> samples_ms);

CompletionRatios
completion_ratios(const MetricsReport& report);

MetricsReport
compute_report(const RunLog& log, const Workload& workload);

/// One table per metric.
void
write_completion_csv(std::ostream& out, const MetricsReport& r);

void
write_breakdown_csv(std::ostream& out, const MetricsReport& r);

void
write_accuracy_csv(std::ostream& out, const MetricsReport& r);

void
write_forwarding_error_csv(std::ostream& out, const MetricsReport& r);

void
write_en_load_csv(std::ostream& out, const MetricsReport& r);

void
write_recall_csv(std::ostream& out, const MetricsReport& r);

void
write_sessions_csv(std::ostream& out, std::span<const SessionRecord> sessions);

void
write_summary(std::ostream& out, const MetricsReport& r);

} // namespace reservoir
