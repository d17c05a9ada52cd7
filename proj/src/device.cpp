#include "reservoir/device.hpp"

#include "reservoir/edge_node.hpp"

#include <algorithm>
#include <charconv>

namespace reservoir {

using nlohmann::ordered_json;

std::string_view
to_string(OffloadMode m)
{
  switch (m) {
    case OffloadMode::Inline:
      return "inline";
    case OffloadMode::Pull:
      return "pull";
    case OffloadMode::Push:
      return "push";
  }
  return "inline";
}

OffloadMode
parse_offload_mode(std::string_view s)
{
  if (s == "inline") {
    return OffloadMode::Inline;
  }
  if (s == "pull") {
    return OffloadMode::Pull;
  }
  if (s == "push") {
    return OffloadMode::Push;
  }
  throw ConfigError("unknown offload mode '" + std::string(s) + "'");
}

Device::Device(DeviceConfig config, std::shared_ptr<const HashFamily> family)
  : config_(std::move(config))
  , family_(std::move(family))
{
  if (!family_) {
    throw ConfigError("device needs a hash family");
  }
  if (config_.segment_bytes == 0) {
    throw ConfigError("segment size must be positive");
  }
}

std::string
Device::input_key(const TaskName& task) const
{
  return task.service.to_uri() + "|" + task.hash_hex;
}

const OffloadSession&
Device::offload(const Name& service, FeatureVector input, double threshold,
                std::optional<Duration> deadline, InstanceId instance, AppContext& ctx)
{
  validate_feature_vector(input);
  if (sessions_.count(instance) > 0) {
    throw SimulationError("duplicate instance id " + std::to_string(instance));
  }
  const bool noreuse = config_.noreuse_services.count(service) > 0;
  if (!noreuse && input.dimension() != family_->config().dimension) {
    throw DegenerateInputError("input dimension does not match the hash family");
  }

  OffloadSession s;
  s.instance = instance;
  s.threshold = threshold;
  s.deadline = deadline;
  s.start = ctx.now();
  Duration hashing{0};
  if (noreuse) {
    s.task = build_noreuse_task_name(service, input_checksum(input));
    hashing = config_.timing.noreuse_hashing;
  }
  else {
    s.task = build_task_name(service, hash_vector(*family_, input), true);
    hashing = config_.timing.hashing_delay(family_->config().num_tables);
  }
  s.input = std::move(input);
  s.sent_at = s.start + hashing;

  auto& session = sessions_.emplace(instance, std::move(s)).first->second;
  if (config_.mode == OffloadMode::Pull) {
    auto& pending = inputs_[input_key(session.task)];
    if (pending.refs == 0) {
      const std::uint64_t padded =
        std::max(config_.declared_input_bytes, serialized_input_size(session.input.dimension()));
      pending.bytes = serialize_input(session.input, padded);
    }
    ++pending.refs;
  }

  auto& waiters = task_waiters_[session.task.to_uri()];
  session.locally_aggregated = !waiters.empty();
  waiters.push_back(instance);
  ctx.trace("offload", session.task.to_name(),
            ordered_json{{"instance", instance},
                         {"hashing_us", hashing.count()},
                         {"aggregated", session.locally_aggregated}});
  if (!session.locally_aggregated) {
    send_task_interest(session, hashing, ctx);
  }
  return session;
}

void
Device::send_task_interest(OffloadSession& s, Duration delay, AppContext& ctx)
{
  TaskParameters p;
  p.similarity_threshold = s.threshold;
  p.deadline = s.deadline;
  if (config_.mode == OffloadMode::Pull) {
    p.input_size_bytes = inputs_.at(input_key(s.task)).bytes.size();
    p.device_prefix = config_.prefix;
  }
  else {
    p.inline_input = s.input;
    if (config_.mode == OffloadMode::Push) {
      p.device_prefix = config_.prefix;
    }
  }
  Interest i;
  i.name = s.task.to_name();
  i.parameters = std::move(p);
  i.instance = s.instance;
  ctx.send_interest(std::move(i), delay);
  arm_timeout(s.instance, SessionState::Sent, ++s.retransmissions, delay + config_.interest_timeout,
              ctx);
}

void
Device::arm_timeout(InstanceId instance, SessionState phase, std::uint32_t attempt,
                    Duration delay, AppContext& ctx)
{
  ctx.schedule(delay, [this, instance, phase, attempt](AppContext& c) {
    auto it = sessions_.find(instance);
    if (it == sessions_.end()) {
      return;
    }
    auto& s = it->second;
    if (s.state != phase || s.retransmissions != attempt) {
      return;
    }
    const bool task_phase = phase == SessionState::Sent;
    const std::string uri = task_phase
                              ? s.task.to_uri()
                              : s.task.result_fetch_form(*s.en_prefix).to_uri();
    // The first send is not a retransmission.
    if (attempt <= config_.max_retransmissions) {
      c.trace("retransmit", Name(uri), ordered_json{{"instance", instance}, {"attempt", attempt}});
      if (task_phase) {
        send_task_interest(s, Duration{0}, c);
      }
      else {
        Interest i;
        i.name = Name(uri);
        i.instance = instance;
        c.send_interest(std::move(i));
        arm_timeout(instance, phase, ++s.retransmissions, config_.interest_timeout, c);
      }
      return;
    }
    auto& table = task_phase ? task_waiters_ : fetch_waiters_;
    auto waiters = std::move(table[uri]);
    table.erase(uri);
    for (auto id : waiters) {
      auto& w = sessions_.at(id);
      if (w.state == phase) {
        fail(w, "timeout", c);
      }
    }
  });
}

void
Device::on_ttc_response(OffloadSession& s, Duration ttc, const Name& en_prefix, AppContext& ctx)
{
  const Duration rtt = std::max(Duration{0}, ctx.now() - s.sent_at);
  s.rtt_estimate = rtt;
  s.en_prefix = en_prefix;
  s.state = SessionState::Waiting;
  const Duration wait = config_.mode == OffloadMode::Push ? ttc + 2 * rtt
                                                          : std::max(Duration{0}, ttc - rtt);
  ctx.trace("ttc", s.task.to_name(),
            ordered_json{{"instance", s.instance},
                         {"ttc_us", ttc.count()},
                         {"rtt_us", rtt.count()},
                         {"wait_us", wait.count()}});
  const InstanceId id = s.instance;
  const std::uint32_t fetches = s.fetches;
  ctx.schedule(wait, [this, id, fetches](AppContext& c) {
    auto it = sessions_.find(id);
    if (it != sessions_.end() && it->second.state == SessionState::Waiting &&
        it->second.fetches == fetches) {
      send_fetch(id, c);
    }
  });
}

void
Device::send_fetch(InstanceId instance, AppContext& ctx)
{
  auto& s = sessions_.at(instance);
  s.state = SessionState::Fetching;
  ++s.fetches;
  const Name name = s.task.result_fetch_form(*s.en_prefix).to_name();
  auto& waiters = fetch_waiters_[name.to_uri()];
  const bool outstanding = !waiters.empty();
  waiters.push_back(instance);
  if (outstanding) {
    return;
  }
  Interest i;
  i.name = name;
  i.instance = instance;
  ctx.send_interest(std::move(i));
  arm_timeout(instance, SessionState::Fetching, ++s.retransmissions, config_.interest_timeout,
              ctx);
}

void
Device::on_data(const Data& data, AppContext& ctx)
{
  const std::string uri = data.name.to_uri();

  if (auto tw = task_waiters_.find(uri); tw != task_waiters_.end()) {
    auto waiters = std::move(tw->second);
    task_waiters_.erase(tw);
    for (auto id : waiters) {
      auto& s = sessions_.at(id);
      if (s.state != SessionState::Sent) {
        continue;
      }
      if (const auto* r = std::get_if<TaskResult>(&data.payload)) {
        const auto source = s.locally_aggregated
                              ? CompletionSource::PitAggregate
                              : ctx.network_outcome(id).value_or(CompletionSource::EnReuse);
        complete(s, *r, source, ctx);
      }
      else if (const auto* t = std::get_if<TtcResponse>(&data.payload)) {
        on_ttc_response(s, t->ttc, t->en_prefix, ctx);
      }
      else if (const auto* n = std::get_if<NegativeResponse>(&data.payload)) {
        fail(s, n->reason, ctx);
      }
    }
    return;
  }

  if (auto fw = fetch_waiters_.find(uri); fw != fetch_waiters_.end()) {
    auto waiters = std::move(fw->second);
    fetch_waiters_.erase(fw);
    bool cached = false;
    for (auto id : waiters) {
      auto& s = sessions_.at(id);
      if (s.state != SessionState::Fetching) {
        continue;
      }
      if (const auto* r = std::get_if<TaskResult>(&data.payload)) {
        if (!cached) {
          ctx.cache_locally(Data{s.task.offload_form().to_name(), *r});
          cached = true;
        }
        const auto upstream = ctx.network_outcome(id);
        const bool aggregated =
          s.locally_aggregated || upstream == CompletionSource::PitAggregate;
        complete(s, *r, aggregated ? CompletionSource::PitAggregate : CompletionSource::EnScratch,
                 ctx);
      }
      else if (const auto* t = std::get_if<TtcResponse>(&data.payload)) {
        s.state = SessionState::Sent;
        s.sent_at = ctx.now() - s.rtt_estimate.value_or(Duration{0});
        on_ttc_response(s, t->ttc, t->en_prefix, ctx);
      }
      else if (const auto* n = std::get_if<NegativeResponse>(&data.payload)) {
        fail(s, n->reason, ctx);
      }
    }
  }
}

void
Device::on_interest(const Interest& interest, AppContext& ctx)
{
  if (!interest.pushed_result) {
    ctx.send_data(serve_input_segment(interest.name));
    return;
  }

  const Name& n = interest.name;
  if (!config_.prefix.is_prefix_of(n) || n.size() < config_.prefix.size() + 3 ||
      n[n.size() - 2] != "result") {
    ctx.send_data(Data{n, NegativeResponse{"unrecognized"}});
    return;
  }
  const Name service = n.prefix(n.size() - 2).suffix_from(config_.prefix.size());
  const std::string& hash = n[n.size() - 1];
  bool cached = false;
  for (auto& [id, s] : sessions_) {
    if ((s.state != SessionState::Waiting && s.state != SessionState::Fetching) ||
        s.task.service != service || s.task.hash_hex != hash) {
      continue;
    }
    if (!cached) {
      ctx.cache_locally(Data{s.task.offload_form().to_name(), *interest.pushed_result});
      cached = true;
    }
    const bool aggregated = s.locally_aggregated ||
                            ctx.network_outcome(id) == CompletionSource::PitAggregate;
    complete(s, *interest.pushed_result,
             aggregated ? CompletionSource::PitAggregate : CompletionSource::EnScratch, ctx);
  }
  ctx.send_data(Data{n, Ack{}});
}

Data
Device::serve_input_segment(const Name& name) const
{
  auto negative = [&](std::string reason) { return Data{name, NegativeResponse{std::move(reason)}}; };
  if (!config_.prefix.is_prefix_of(name)) {
    return negative("not-mine");
  }
  const Name rest = name.suffix_from(config_.prefix.size());
  if (rest.size() < 4 || rest[rest.size() - 3] != "input") {
    return negative("unrecognized");
  }
  const Name service = rest.prefix(rest.size() - 3);
  const std::string& hash = rest[rest.size() - 2];
  const std::string& last = rest[rest.size() - 1];
  std::uint64_t seg = 0;
  auto [ptr, ec] = std::from_chars(last.data(), last.data() + last.size(), seg);
  if (ec != std::errc{} || ptr != last.data() + last.size()) {
    return negative("bad-segment");
  }
  auto it = inputs_.find(service.to_uri() + "|" + hash);
  if (it == inputs_.end()) {
    return negative("no-input");
  }
  const auto& bytes = it->second.bytes;
  const std::uint64_t begin = seg * config_.segment_bytes;
  if (begin >= bytes.size()) {
    return negative("bad-segment");
  }
  const std::uint64_t end = std::min<std::uint64_t>(bytes.size(), begin + config_.segment_bytes);
  InputSegment out;
  out.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(begin),
                   bytes.begin() + static_cast<std::ptrdiff_t>(end));
  out.total_size = bytes.size();
  return Data{name, std::move(out)};
}

void
Device::complete(OffloadSession& s, const TaskResult& r, CompletionSource source,
                 AppContext& ctx)
{
  s.state = SessionState::Done;
  s.result = r;
  s.source = source;
  s.end = ctx.now();
  ctx.trace("complete", s.task.to_name(),
            ordered_json{{"instance", s.instance},
                         {"source", to_string(source)},
                         {"producer", r.producer},
                         {"latency_us", (*s.end - s.start).count()}});
  finish(s, ctx);
}

void
Device::fail(OffloadSession& s, const std::string& reason, AppContext& ctx)
{
  s.state = SessionState::Failed;
  s.end = ctx.now();
  ctx.trace("session_failed", s.task.to_name(),
            ordered_json{{"instance", s.instance}, {"reason", reason}});
  finish(s, ctx);
}

void
Device::finish(OffloadSession& s, AppContext& ctx)
{
  SessionRecord rec;
  rec.instance = s.instance;
  rec.device = config_.prefix.to_uri();
  rec.name = s.task.to_uri();
  rec.start = s.start;
  rec.end = s.end;
  rec.source = s.source;
  rec.threshold = s.threshold;
  rec.deadline = s.deadline;
  rec.own_label = s.input.label;
  if (s.result) {
    rec.result_label = s.result->label;
    rec.producer = s.result->producer;
  }
  rec.failed = s.state == SessionState::Failed;
  ctx.log().sessions.push_back(std::move(rec));

  if (config_.mode == OffloadMode::Pull) {
    auto it = inputs_.find(input_key(s.task));
    if (it != inputs_.end() && --it->second.refs == 0) {
      inputs_.erase(it);
    }
  }
  s.input.values.clear();
  s.input.values.shrink_to_fit();
}

} // namespace reservoir
