#pragma once

#include "reservoir/config.hpp"
#include "reservoir/metrics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace reservoir {

struct RunOptions
{
  std::vector<std::uint64_t> seeds{1};
  bool trace = false;
  unsigned jobs = 1;
};

struct SeedResult
{
  std::uint64_t seed = 0;
  MetricsReport report;
};

/// Aggregated value of one metric across seeds.
struct AggregateRow
{
  std::string metric;
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Parses "1..50", "3", or "1,4,9" (ranges allowed inside lists).
std::vector<std::uint64_t>
parse_seed_list(const std::string& text);

/// Runs one seed and writes its report files into `dir`.
SeedResult
run_seed(const SimConfig& config, std::uint64_t seed, const std::filesystem::path& dir,
         bool trace);

/// One run directory per seed ("seed_<n>") plus aggregate.csv.
std::vector<SeedResult>
run_experiment(const SimConfig& config, const std::filesystem::path& out_dir,
               const RunOptions& options);

/// Sample mean and standard deviation of the headline metrics.
std::vector<AggregateRow>
aggregate(const std::vector<SeedResult>& results);

void
write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// Runs every value of `key` into "<key>=<value>" subdirectories and writes
/// sweep.csv with one row per value.
std::vector<std::vector<AggregateRow>>
sweep(const SimConfig& config, const std::string& key, const std::vector<std::string>& values,
      const std::filesystem::path& out_dir, const RunOptions& options);

} // namespace reservoir
