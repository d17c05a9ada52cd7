#include "reservoir/workload.hpp"

#include <cmath>
#include <random>

namespace reservoir {

std::string_view
to_string(Correlation c)
{
  switch (c) {
    case Correlation::Low:
      return "low";
    case Correlation::Moderate:
      return "moderate";
    case Correlation::High:
      return "high";
  }
  return "high";
}

Correlation
parse_correlation(std::string_view s)
{
  if (s == "low") {
    return Correlation::Low;
  }
  if (s == "moderate") {
    return Correlation::Moderate;
  }
  if (s == "high") {
    return Correlation::High;
  }
  throw ConfigError("unknown correlation level '" + std::string(s) + "'");
}

CorrelationPreset
correlation_preset(Correlation c)
{
  switch (c) {
    case Correlation::High:
      return {100, 0.01, 0.9};
    case Correlation::Moderate:
      return {200, 0.025, 0.6};
    case Correlation::Low:
      return {1000, 0.04, 0.0};
  }
  return {100, 0.01, 0.9};
}

std::vector<double>
random_unit_vector(std::size_t dimension, std::mt19937_64& rng)
{
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dimension);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = g(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : v) {
    x /= norm;
  }
  return v;
}

Workload
generate_workload(const WorkloadParams& p, std::size_t num_devices)
{
  if (p.dimension == 0) {
    throw ConfigError("workload dimension must be positive");
  }
  if (num_devices == 0 && p.count > 0) {
    throw ConfigError("workload needs at least one device");
  }
  if (p.services.empty() && p.count > 0) {
    throw ConfigError("workload needs at least one service");
  }
  const auto preset = correlation_preset(p.correlation);
  const std::size_t clusters = p.num_clusters.value_or(preset.num_clusters);
  const double sigma = p.sigma.value_or(preset.sigma);
  const double hot_fraction = p.hot_fraction.value_or(preset.hot_fraction);
  if (clusters == 0) {
    throw ConfigError("num_clusters must be at least 1");
  }
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw ConfigError("sigma must be finite and non-negative");
  }
  if (hot_fraction < 0.0 || hot_fraction > 1.0) {
    throw ConfigError("hot_fraction must be in [0, 1]");
  }
  if (p.mean_interarrival <= Duration{0}) {
    throw ConfigError("mean inter-arrival time must be positive");
  }
  const std::size_t hot = std::min(p.hot_clusters, clusters);

  std::mt19937_64 rng(p.seed);
  Workload w;
  w.centers.reserve(clusters);
  for (std::size_t c = 0; c < clusters; ++c) {
    w.centers.push_back(random_unit_vector(p.dimension, rng));
  }

  std::exponential_distribution<double> gap(1.0 / static_cast<double>(p.mean_interarrival.count()));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_device(0, num_devices == 0 ? 0 : num_devices - 1);
  std::uniform_int_distribution<std::size_t> pick_service(0, p.services.empty() ? 0 : p.services.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_hot(0, hot == 0 ? 0 : hot - 1);
  std::uniform_int_distribution<std::size_t> pick_any(0, clusters - 1);
  std::uniform_int_distribution<std::size_t> pick_cold(hot, clusters - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  double t = 0.0;
  w.tasks.reserve(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    t += gap(rng);
    WorkloadTask task;
    task.instance = i + 1;
    task.at = SimTime{static_cast<SimTime::rep>(std::llround(t))};
    task.device = pick_device(rng);
    task.service = p.services[pick_service(rng)];
    std::size_t cluster = 0;
    if (hot > 0 && coin(rng) < hot_fraction) {
      cluster = pick_hot(rng);
    }
    else if (hot_fraction > 0.0 && clusters > hot) {
      cluster = pick_cold(rng);
    }
    else {
      cluster = pick_any(rng);
    }
    task.cluster = cluster;
    std::vector<double> v = w.centers[cluster];
    if (sigma > 0.0) {
      double norm = 0.0;
      for (auto& x : v) {
        x += sigma * noise(rng);
        norm += x * x;
      }
      norm = std::sqrt(norm);
      for (auto& x : v) {
        x /= norm;
      }
    }
    task.input = FeatureVector{std::move(v), static_cast<std::int64_t>(cluster)};
    task.threshold = p.threshold;
    task.deadline = p.deadline;
    w.tasks.push_back(std::move(task));
  }
  return w;
}

} // namespace reservoir
