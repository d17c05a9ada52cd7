#pragma once

#include "reservoir/content_store.hpp"
#include "reservoir/fib.hpp"
#include "reservoir/packet.hpp"
#include "reservoir/pit.hpp"
#include "reservoir/rfib.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace reservoir {

/// Per-packet processing charges, drawn uniformly from inclusive microsecond ranges.
struct ProcessingDelays
{
  Duration fib_min{71};
  Duration fib_max{101};
  Duration rfib_min{74};
  Duration rfib_max{106};

  void
  validate() const;
};

enum class InterestDecision
{
  CsHit,
  Aggregated,
  ForwardedByHint,
  ForwardedByRfib,
  ForwardedByFib,
  DroppedNoRoute,
  DroppedMalformed,
};

std::string_view
to_string(InterestDecision d);

enum class DataDecision
{
  Forwarded,
  Unsolicited,
};

std::string_view
to_string(DataDecision d);

enum class ProcessingPath
{
  Fib,
  Rfib,
};

struct Outgoing
{
  FaceId face = kAppFace;
  Packet packet;
};

struct InterestOutcome
{
  InterestDecision decision = InterestDecision::DroppedNoRoute;
  NameClass name_class = NameClass::Plain;
  ProcessingPath path = ProcessingPath::Fib;
  Duration processing{0};
  /// Same name arriving again on a face already recorded in the PIT entry.
  bool retransmission = false;
  std::optional<RfibMatch> rfib_match;
  std::vector<Outgoing> out;
  std::string drop_reason;
};

struct DataOutcome
{
  DataDecision decision = DataDecision::Unsolicited;
  Duration processing{0};
  bool cached = false;
  std::optional<Name> evicted;
  std::vector<Outgoing> out;
};

struct ForwarderCounters
{
  std::uint64_t interests = 0;
  std::uint64_t cs_hits = 0;
  std::uint64_t aggregated = 0;
  std::uint64_t rfib_lookups = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t dropped = 0;
  std::uint64_t data_in = 0;
  std::uint64_t data_copies_out = 0;
  std::uint64_t data_unsolicited = 0;
};

/// CS + PIT + FIB + rFIB state machine of one node. User-device forwarders keep
/// an empty rFIB; the first forwarder with a non-empty rFIB performs the reuse
/// lookup and attaches a forwarding hint so later hops use the FIB only.
class Forwarder
{
public:
  struct Options
  {
    std::size_t cs_capacity = 1000;
    Duration pit_lifetime = std::chrono::seconds{4};
    ProcessingDelays delays;
    std::uint64_t seed = 1;
  };

  Forwarder(std::string node_id, Options options);

  InterestOutcome
  on_interest(const Interest& interest, FaceId in_face, SimTime now);

  DataOutcome
  on_data(const Data& data, FaceId in_face, SimTime now);

  /// Purges PIT entries whose expiry is before `now`.
  std::vector<Name>
  pit_expire(SimTime now);

  const std::string&
  node_id() const
  {
    return node_id_;
  }

  ContentStore&
  cs()
  {
    return cs_;
  }

  const ContentStore&
  cs() const
  {
    return cs_;
  }

  Pit&
  pit()
  {
    return pit_;
  }

  Fib&
  fib()
  {
    return fib_;
  }

  const Fib&
  fib() const
  {
    return fib_;
  }

  Rfib&
  rfib()
  {
    return rfib_;
  }

  const Rfib&
  rfib() const
  {
    return rfib_;
  }

  const ForwarderCounters&
  counters() const
  {
    return counters_;
  }

  const Options&
  options() const
  {
    return options_;
  }

private:
  Duration
  draw_delay(ProcessingPath path);

  void
  forward_by_fib(InterestOutcome& out, const Interest& interest, const Name& lookup_name,
                 InterestDecision decision);

  std::string node_id_;
  Options options_;
  ContentStore cs_;
  Pit pit_;
  Fib fib_;
  Rfib rfib_;
  std::mt19937_64 rng_;
  ForwarderCounters counters_;
};

} // namespace reservoir
