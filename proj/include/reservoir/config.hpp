#pragma once

#include "reservoir/device.hpp"
#include "reservoir/edge_node.hpp"
#include "reservoir/forwarder.hpp"
#include "reservoir/topology.hpp"
#include "reservoir/workload.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace reservoir {

struct ServiceConfig
{
  Name name;
  /// Offering ENs; empty means every EN.
  std::vector<Name> ens;
  /// Non-reuse services use checksum names and bypass reuse.
  bool reuse = true;
};

/// A task placed by hand: a cluster center offered by a named device.
struct ExplicitTask
{
  SimTime at{0};
  std::string device;
  Name service;
  std::size_t cluster = 0;
  std::optional<double> threshold;
};

struct TopologyConfig
{
  bool generated = true;
  TopologyParams params;
  /// Used when `generated` is false.
  Topology explicit_topology;
};

struct EdgeSection
{
  std::size_t store_capacity = 10000;
  ExecutionModel execution;
  double ewma_alpha = 0.125;
  std::optional<Duration> search_delay;
};

struct DeviceSection
{
  std::size_t cs_capacity = 100;
  std::optional<Duration> hashing_delay;
  Duration interest_timeout{std::chrono::seconds{4}};
  std::uint32_t max_retransmissions = 3;
};

struct OffloadConfig
{
  OffloadMode mode = OffloadMode::Inline;
  std::uint64_t declared_input_bytes = 0;
  std::size_t segment_bytes = 8192;
};

struct LossConfig
{
  /// Probability of dropping a packet on each link traversal.
  double rate = 0.0;
};

struct RebalanceConfig
{
  bool enabled = false;
  Duration window{std::chrono::seconds{1}};
  double skew = 2.0;
};

struct SimConfig
{
  HashFamilyConfig hash;
  std::uint32_t probe_radius = kDefaultProbeRadius;
  TopologyConfig topology;
  std::vector<ServiceConfig> services;
  WorkloadParams workload;
  std::vector<ExplicitTask> explicit_tasks;
  Forwarder::Options forwarder;
  EdgeSection edge;
  DeviceSection device;
  OffloadConfig offload;
  LossConfig loss;
  RebalanceConfig rebalance;
  /// Hand-written rFIB layouts per service; computed by assign_buckets otherwise.
  std::map<Name, std::vector<RfibEntry>> explicit_rfib;
  std::uint64_t seed = 1;
  bool trace = false;
};

struct Diagnostic
{
  /// Dotted path into the config, e.g. "hash.bits_per_table".
  std::string path;
  /// 1-based source line, 0 when unknown.
  int line = 0;
  std::string message;
};

std::string
format_diagnostic(const Diagnostic& d, const std::string& source = {});

/// Thrown by the loaders with every problem found.
class ConfigDiagnostics : public ConfigError
{
public:
  explicit ConfigDiagnostics(std::vector<Diagnostic> diagnostics, std::string source = {});

  const std::vector<Diagnostic>&
  diagnostics() const
  {
    return diagnostics_;
  }

private:
  std::vector<Diagnostic> diagnostics_;
};

/// Parses YAML text. Throws ConfigDiagnostics on syntax or structural errors.
SimConfig
parse_config(const std::string& yaml_text, const std::string& source = "<string>");

SimConfig
load_config(const std::filesystem::path& path);

/// Structural checks on an assembled config; empty when valid.
std::vector<Diagnostic>
validate_config(const SimConfig& config);

/// Keys accepted by set_parameter and the sweep command.
const std::vector<std::string>&
sweepable_keys();

/// Sets one sweepable key from its text form. Throws ConfigError for unknown
/// keys or unparsable values.
void
set_parameter(SimConfig& config, const std::string& key, const std::string& value);

} // namespace reservoir
