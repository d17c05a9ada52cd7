#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace reservoir {

/// Simulated time, integer microseconds since the start of a run.
using SimTime = std::chrono::microseconds;
using Duration = std::chrono::microseconds;

using FaceId = std::uint32_t;

/// Face connecting a forwarder to its co-located application.
inline constexpr FaceId kAppFace = 0;

/// Identifies one offloaded task instance across the whole run.
using InstanceId = std::uint64_t;

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class MalformedNameError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DegenerateInputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class NoRouteError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ServiceUnknownError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a run stops with unfinished sessions and nothing left to dispatch.
class SimulationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline double
to_ms(Duration d)
{
  return static_cast<double>(d.count()) / 1000.0;
}

inline Duration
from_ms(double ms)
{
  return Duration{static_cast<std::int64_t>(ms * 1000.0 + (ms >= 0 ? 0.5 : -0.5))};
}

} // namespace reservoir
