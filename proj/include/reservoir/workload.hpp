#pragma once

#include "reservoir/lsh.hpp"
#include "reservoir/name.hpp"

#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace reservoir {

enum class Correlation
{
  Low,
  Moderate,
  High,
};

std::string_view
to_string(Correlation c);

Correlation
parse_correlation(std::string_view s);

struct WorkloadParams
{
  std::size_t count = 1000;
  std::size_t dimension = 128;
  Correlation correlation = Correlation::High;
  /// Preset values apply when unset.
  std::optional<std::size_t> num_clusters;
  std::optional<double> sigma;
  std::optional<double> hot_fraction;
  std::size_t hot_clusters = 10;
  Duration mean_interarrival{std::chrono::milliseconds{10}};
  double threshold = 0.9;
  std::optional<Duration> deadline;
  std::vector<Name> services;
  std::uint64_t seed = 1;
};

/// Preset values for a correlation level.
struct CorrelationPreset
{
  std::size_t num_clusters;
  double sigma;
  /// Share of tasks drawn from the first `hot_clusters` clusters.
  double hot_fraction;
};

CorrelationPreset
correlation_preset(Correlation c);

struct WorkloadTask
{
  InstanceId instance = 0;
  SimTime at{0};
  /// Index into the topology's device list.
  std::size_t device = 0;
  Name service;
  FeatureVector input;
  double threshold = 0.9;
  std::optional<Duration> deadline;
  std::size_t cluster = 0;
};

struct Workload
{
  std::vector<WorkloadTask> tasks;
  std::vector<std::vector<double>> centers;
};

/// Clustered task stream: centers uniform on the unit sphere, each task
/// normalize(center + N(0, sigma^2) per coordinate), labelled with its cluster.
/// Arrivals are Poisson; devices and services are picked uniformly; instance
/// ids run from 1.
Workload
generate_workload(const WorkloadParams& params, std::size_t num_devices);

/// Unit vector drawn uniformly on the sphere.
std::vector<double>
random_unit_vector(std::size_t dimension, std::mt19937_64& rng);

} // namespace reservoir
