#pragma once

#include "reservoir/application.hpp"
#include "reservoir/timing.hpp"

#include <map>
#include <memory>
#include <set>
#include <vector>

namespace reservoir {

enum class OffloadMode
{
  /// Input travels inside the task Interest.
  Inline,
  /// The EN pulls the input from the device in segments.
  Pull,
  /// Inline input; the EN pushes the result back instead of waiting for a fetch.
  Push,
};

std::string_view
to_string(OffloadMode m);

OffloadMode
parse_offload_mode(std::string_view s);

struct DeviceConfig
{
  Name prefix;
  OffloadMode mode = OffloadMode::Inline;
  /// Pull mode: the served input is zero padded up to this size.
  std::uint64_t declared_input_bytes = 0;
  std::size_t segment_bytes = 8192;
  LshTiming timing;
  /// Services offloaded with checksum names and no reuse.
  std::set<Name> noreuse_services;
  Duration interest_timeout{std::chrono::seconds{4}};
  std::uint32_t max_retransmissions = 3;
};

enum class SessionState
{
  /// Task Interest outstanding.
  Sent,
  /// TTC received; waiting to fetch.
  Waiting,
  /// Result-fetch Interest outstanding.
  Fetching,
  Done,
  Failed,
};

struct OffloadSession
{
  InstanceId instance = 0;
  TaskName task;
  FeatureVector input;
  double threshold = 0.9;
  std::optional<Duration> deadline;
  SimTime start{0};
  /// When the task Interest left (or would have left) the device.
  SimTime sent_at{0};
  SessionState state = SessionState::Sent;
  /// Shares another local session's outstanding task Interest.
  bool locally_aggregated = false;
  std::optional<Duration> rtt_estimate;
  std::optional<Name> en_prefix;
  std::uint32_t fetches = 0;
  std::uint32_t retransmissions = 0;
  std::optional<TaskResult> result;
  std::optional<CompletionSource> source;
  std::optional<SimTime> end;
};

/// IoT device: names tasks with LSH, offloads them, follows TTC replies with
/// deferred result fetches and serves its input to pulling ENs.
class Device : public Application
{
public:
  Device(DeviceConfig config, std::shared_ptr<const HashFamily> family);

  /// Starts an offload at ctx.now(). Throws DegenerateInputError for bad input.
  const OffloadSession&
  offload(const Name& service, FeatureVector input, double threshold,
          std::optional<Duration> deadline, InstanceId instance, AppContext& ctx);

  void
  on_interest(const Interest& interest, AppContext& ctx) override;

  void
  on_data(const Data& data, AppContext& ctx) override;

  /// Handles a TTC reply: waits max(0, ttc - rtt) then fetches from `en_prefix`.
  void
  on_ttc_response(OffloadSession& session, Duration ttc, const Name& en_prefix,
                  AppContext& ctx);

  /// Segment of a pending input, or a negative Data when unknown.
  Data
  serve_input_segment(const Name& segment_name) const;

  const std::map<InstanceId, OffloadSession>&
  sessions() const
  {
    return sessions_;
  }

  const DeviceConfig&
  config() const
  {
    return config_;
  }

private:
  struct PendingInput
  {
    std::vector<std::uint8_t> bytes;
    std::size_t refs = 0;
  };

  void
  send_task_interest(OffloadSession& s, Duration delay, AppContext& ctx);

  void
  send_fetch(InstanceId instance, AppContext& ctx);

  void
  arm_timeout(InstanceId instance, SessionState phase, std::uint32_t attempt, Duration delay,
              AppContext& ctx);

  void
  complete(OffloadSession& s, const TaskResult& r, CompletionSource source, AppContext& ctx);

  void
  fail(OffloadSession& s, const std::string& reason, AppContext& ctx);

  void
  finish(OffloadSession& s, AppContext& ctx);

  std::string
  input_key(const TaskName& task) const;

  DeviceConfig config_;
  std::shared_ptr<const HashFamily> family_;
  std::map<InstanceId, OffloadSession> sessions_;
  /// Sessions waiting on an outstanding Interest, by name URI.
  std::map<std::string, std::vector<InstanceId>> task_waiters_;
  std::map<std::string, std::vector<InstanceId>> fetch_waiters_;
  std::map<std::string, PendingInput> inputs_;
};

} // namespace reservoir
