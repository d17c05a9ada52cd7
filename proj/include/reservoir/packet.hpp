#pragma once

#include "reservoir/name.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace reservoir {

/// Execution result. In this simulator the result of running a service on an
/// input is that input's ground-truth label.
struct TaskResult
{
  std::int64_t label = 0;
  /// Instance whose input was actually executed.
  InstanceId producer = 0;
  bool reused = false;
  double similarity = 1.0;

  friend bool
  operator==(const TaskResult&, const TaskResult&) = default;
};

/// Scenario (b): the EN will execute from scratch.
struct TtcResponse
{
  Duration ttc{0};
  Name en_prefix;
};

struct NegativeResponse
{
  std::string reason;
};

struct InputSegment
{
  std::vector<std::uint8_t> bytes;
  std::uint64_t total_size = 0;
};

struct Ack
{
};

using DataPayload = std::variant<TaskResult, TtcResponse, NegativeResponse, InputSegment, Ack>;

struct Interest
{
  Name name;
  std::optional<ForwardingHint> forwarding_hint;
  std::optional<TaskParameters> parameters;
  /// Result attached by an EN pushing results to a device.
  std::optional<TaskResult> pushed_result;
  /// Simulation bookkeeping only; never used for forwarding.
  InstanceId instance = 0;
};

struct Data
{
  Name name;
  DataPayload payload;

  bool
  carries_result() const
  {
    return std::holds_alternative<TaskResult>(payload);
  }
};

using Packet = std::variant<Interest, Data>;

const Name&
packet_name(const Packet& p);

/// Wire layout of a task input: u32 dimension, i64 label, dimension doubles,
/// little-endian, zero padded up to `padded_size`.
std::vector<std::uint8_t>
serialize_input(const FeatureVector& v, std::uint64_t padded_size = 0);

/// Throws DegenerateInputError on truncated buffers.
FeatureVector
deserialize_input(const std::vector<std::uint8_t>& bytes);

std::uint64_t
serialized_input_size(std::size_t dimension);

/// CRC32 of the serialized input, used to name non-reuse tasks.
std::uint32_t
input_checksum(const FeatureVector& v);

} // namespace reservoir
