#include "reservoir/edge_node.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace reservoir {

using nlohmann::ordered_json;

ServiceStats::ServiceStats(double alpha)
  : alpha_(alpha)
{
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("EWMA alpha must be in (0, 1]");
  }
}

void
ServiceStats::record(const Name& service, Duration observed)
{
  auto& e = entries_[service];
  const double x = static_cast<double>(observed.count());
  e.ewma_us = e.samples == 0 ? x : (1.0 - alpha_) * e.ewma_us + alpha_ * x;
  ++e.samples;
}

std::optional<Duration>
ServiceStats::ewma(const Name& service) const
{
  auto it = entries_.find(service);
  if (it == entries_.end() || it->second.samples == 0) {
    return std::nullopt;
  }
  return Duration{static_cast<Duration::rep>(std::llround(it->second.ewma_us))};
}

std::size_t
ServiceStats::samples(const Name& service) const
{
  auto it = entries_.find(service);
  return it == entries_.end() ? 0 : it->second.samples;
}

Duration
estimate_ttc(const ServiceStats& stats, const Name& service, Duration nominal)
{
  return stats.ewma(service).value_or(nominal);
}

Name
input_segment_name(const Name& device_prefix, const Name& service, const std::string& hash_hex,
                   std::uint64_t segment)
{
  Name n = device_prefix;
  n.append(service);
  n.append("input");
  n.append(hash_hex);
  n.append(std::to_string(segment));
  return n;
}

Name
push_result_name(const Name& device_prefix, const Name& service, const std::string& hash_hex)
{
  Name n = device_prefix;
  n.append(service);
  n.append("result");
  n.append(hash_hex);
  return n;
}

std::uint64_t
segment_count(std::uint64_t input_size, std::size_t segment_bytes)
{
  if (segment_bytes == 0) {
    throw ConfigError("segment size must be positive");
  }
  return (input_size + segment_bytes - 1) / segment_bytes;
}

EdgeNode::EdgeNode(EdgeNodeConfig config)
  : config_(std::move(config))
  , stats_(config_.ewma_alpha)
  , rng_(config_.seed)
{
  config_.hash.validate();
  if (config_.execution.min > config_.execution.max || config_.execution.min < Duration{0}) {
    throw ConfigError("execution time range is invalid");
  }
  if (config_.store_capacity == 0) {
    throw ConfigError("EN store capacity must be positive");
  }
  for (const auto& s : config_.services) {
    services_.insert(s);
    stores_.emplace(s, ReuseStore(config_.hash.num_tables, config_.hash.bits_per_table,
                                  config_.store_capacity));
  }
}

bool
EdgeNode::offers(const Name& service) const
{
  return services_.count(service) > 0;
}

ReuseStore&
EdgeNode::store(const Name& service)
{
  auto it = stores_.find(service);
  if (it == stores_.end()) {
    throw ServiceUnknownError("service not offered: " + service.to_uri());
  }
  return it->second;
}

const ReuseStore*
EdgeNode::find_store(const Name& service) const
{
  auto it = stores_.find(service);
  return it == stores_.end() ? nullptr : &it->second;
}

void
EdgeNode::set_assigned_ranges(const Name& service, std::vector<BucketRange> ranges)
{
  assigned_[service] = std::move(ranges);
}

const std::vector<BucketRange>*
EdgeNode::assigned_ranges(const Name& service) const
{
  auto it = assigned_.find(service);
  return it == assigned_.end() ? nullptr : &it->second;
}

std::optional<ReuseCandidate>
EdgeNode::find_reusable(const Name& service, const FeatureVector& input,
                        const ConcatenatedHash& hash, double threshold)
{
  auto& st = store(service);
  auto best = st.nearest(input, hash, config_.probe_radius);
  if (!best || best->similarity < threshold) {
    return std::nullopt;
  }
  st.touch(best->task->id);
  return best;
}

std::optional<StoredTask>
EdgeNode::store_result(StoredTask task)
{
  auto evicted = store(task.service).insert(std::move(task));
  if (evicted) {
    ++counters_.evictions;
  }
  return evicted;
}

Duration
EdgeNode::draw_execution_time()
{
  std::uniform_int_distribution<Duration::rep> dist(config_.execution.min.count(),
                                                    config_.execution.max.count());
  return Duration{dist(rng_)};
}

void
EdgeNode::on_interest(const Interest& interest, AppContext& ctx)
{
  const Name prefixes[] = {config_.prefix};
  ParsedName parsed;
  try {
    parsed = parse_name(interest.name, prefixes);
  }
  catch (const MalformedNameError& e) {
    ctx.send_data(Data{interest.name, NegativeResponse{"malformed"}});
    ctx.trace("en_reject", interest.name, ordered_json{{"reason", e.what()}});
    return;
  }

  switch (parsed.kind) {
    case NameClass::ResultFetch:
      handle_result_fetch(interest, *parsed.task, ctx);
      return;
    case NameClass::ReuseTask:
    case NameClass::NonReuseTask:
      handle_task(interest, *parsed.task, ctx);
      return;
    case NameClass::Plain:
      ctx.send_data(Data{interest.name, NegativeResponse{"unrecognized"}});
      return;
  }
}

void
EdgeNode::log_arrival(AppContext& ctx, const Interest& interest, const TaskName& task,
                      const ConcatenatedHash& hash, ArrivalOutcome outcome,
                      std::optional<ReuseCandidate> best, std::size_t store_size)
{
  EnArrival a;
  a.time = ctx.now();
  a.en = config_.prefix.to_uri();
  a.service = task.service;
  a.instance = interest.instance;
  a.hash = hash;
  a.threshold = interest.parameters ? interest.parameters->similarity_threshold : 0.0;
  a.outcome = outcome;
  if (best) {
    a.best_similarity = best->similarity;
    if (outcome == ArrivalOutcome::Reuse) {
      a.reused_id = best->task->id;
    }
  }
  a.store_size = store_size;
  ctx.log().en_events.emplace_back(std::move(a));
}

void
EdgeNode::fail_task(const Interest& interest, const TaskName& task, const std::string& reason,
                    AppContext& ctx)
{
  ++counters_.failures;
  ConcatenatedHash none;
  none.index_size_bytes = config_.hash.index_size_bytes;
  log_arrival(ctx, interest, task, none, ArrivalOutcome::Failed, std::nullopt, 0);
  ctx.send_data(Data{interest.name, NegativeResponse{reason}});
  ctx.trace("en_fail", interest.name, ordered_json{{"reason", reason}});
}

void
EdgeNode::handle_task(const Interest& interest, const TaskName& task, AppContext& ctx)
{
  ++counters_.tasks_received;
  if (!offers(task.service)) {
    fail_task(interest, task, "service-unknown", ctx);
    return;
  }
  if (!interest.parameters) {
    fail_task(interest, task, "missing-parameters", ctx);
    return;
  }
  if (interest.parameters->inline_input) {
    process_task(interest, task, *interest.parameters->inline_input, ctx);
  }
  else {
    pull_input(interest, task, ctx);
  }
}

void
EdgeNode::process_task(const Interest& interest, const TaskName& task,
                       const FeatureVector& input, AppContext& ctx)
{
  if (task.keyword == TaskKeyword::NoReuse) {
    ConcatenatedHash none;
    none.index_size_bytes = config_.hash.index_size_bytes;
    log_arrival(ctx, interest, task, none, ArrivalOutcome::NoReuse, std::nullopt, 0);
    start_execution(interest, task, input, Duration{0}, ctx);
    return;
  }

  ConcatenatedHash hash;
  try {
    hash = decode_hash(task.hash_hex, config_.hash.index_size_bytes, config_.hash.num_tables);
  }
  catch (const MalformedNameError&) {
    fail_task(interest, task, "malformed-hash", ctx);
    return;
  }
  if (input.values.size() != config_.hash.dimension) {
    fail_task(interest, task, "dimension-mismatch", ctx);
    return;
  }

  auto& st = store(task.service);
  const double threshold = interest.parameters->similarity_threshold;
  const std::size_t store_size = st.size();
  const Duration search = config_.timing.search_delay(config_.hash.num_tables, store_size);
  auto best = st.nearest(input, hash, config_.probe_radius);

  if (best && best->similarity >= threshold) {
    st.touch(best->task->id);
    ++counters_.reuse_hits;
    log_arrival(ctx, interest, task, hash, ArrivalOutcome::Reuse, best, store_size);
    TaskResult r{best->task->result, best->task->id, true, best->similarity};
    ctx.trace("en_reuse", interest.name,
              ordered_json{{"instance", interest.instance},
                           {"reused_id", best->task->id},
                           {"similarity", best->similarity},
                           {"search_us", search.count()}});
    ctx.send_data(Data{interest.name, r}, search);
    return;
  }

  const std::string key = task.offload_form().to_uri();
  auto pit = pending_.find(key);
  if (pit != pending_.end() && !pit->second.ready) {
    double sim = -1.0;
    try {
      sim = cosine_similarity(pit->second.input, input);
    }
    catch (const DegenerateInputError&) {
    }
    if (sim >= threshold) {
      ++counters_.joined_pending;
      log_arrival(ctx, interest, task, hash, ArrivalOutcome::JoinedPending, best, store_size);
      const SimTime reply_at = ctx.now() + search;
      const Duration remaining = std::max(Duration{0}, pit->second.ready_time - reply_at);
      ctx.send_data(Data{interest.name, TtcResponse{remaining, config_.prefix}}, search);
      return;
    }
  }

  log_arrival(ctx, interest, task, hash, ArrivalOutcome::Scratch, best, store_size);
  start_execution(interest, task, input, search, ctx);
}

void
EdgeNode::start_execution(const Interest& interest, const TaskName& task,
                          const FeatureVector& input, Duration search_delay, AppContext& ctx)
{
  ++counters_.scratch_executions;
  const Duration exec = draw_execution_time();
  const Duration ttc = estimate_ttc(stats_, task.service, config_.execution.nominal);
  const std::string key = task.offload_form().to_uri();

  PendingExecution pe;
  pe.task = task.offload_form();
  pe.input = input;
  pe.ready_time = ctx.now() + search_delay + exec;
  pending_[key] = std::move(pe);

  ctx.trace("en_execute", interest.name,
            ordered_json{{"instance", interest.instance},
                         {"exec_us", exec.count()},
                         {"ttc_us", ttc.count()},
                         {"search_us", search_delay.count()}});
  ctx.send_data(Data{interest.name, TtcResponse{ttc, config_.prefix}}, search_delay);

  const InstanceId producer = interest.instance;
  std::optional<Name> push_to;
  if (config_.push_results && interest.parameters && interest.parameters->device_prefix) {
    push_to = interest.parameters->device_prefix;
  }
  const bool reusable = task.keyword == TaskKeyword::Reuse;
  TaskName offload = task.offload_form();

  ctx.schedule(search_delay + exec, [this, key, exec, producer, input, push_to, reusable,
                                     offload](AppContext& c) {
    stats_.record(offload.service, exec);
    TaskResult result{input.label, producer, false, 1.0};
    auto it = pending_.find(key);
    if (it != pending_.end() && it->second.input.values == input.values) {
      it->second.ready = true;
      it->second.result = result;
    }
    if (reusable) {
      StoredTask st;
      st.id = producer;
      st.service = offload.service;
      st.input = input;
      st.hash =
        decode_hash(offload.hash_hex, config_.hash.index_size_bytes, config_.hash.num_tables);
      st.result = input.label;
      st.stored_at = c.now();
      auto evicted = store_result(st);
      const std::string en = config_.prefix.to_uri();
      c.log().en_events.emplace_back(StoreEvent{c.now(), en, offload.service, producer, true});
      if (evicted) {
        c.log().en_events.emplace_back(
          StoreEvent{c.now(), en, offload.service, evicted->id, false});
      }
    }
    c.trace("en_complete", offload.to_name(),
            ordered_json{{"instance", producer}, {"label", input.label}});
    if (push_to) {
      Interest push;
      push.name = push_result_name(*push_to, offload.service, offload.hash_hex);
      push.pushed_result = result;
      push.instance = producer;
      c.send_interest(std::move(push));
    }
  });
}

void
EdgeNode::handle_result_fetch(const Interest& interest, const TaskName& fetch, AppContext& ctx)
{
  ++counters_.result_fetches;
  const std::string key = fetch.offload_form().to_uri();
  auto it = pending_.find(key);
  if (it == pending_.end()) {
    ctx.send_data(Data{interest.name, NegativeResponse{"unknown-task"}});
    return;
  }
  if (it->second.ready) {
    ctx.send_data(Data{interest.name, it->second.result});
    return;
  }
  const Duration remaining = std::max(Duration{0}, it->second.ready_time - ctx.now());
  ctx.send_data(Data{interest.name, TtcResponse{remaining, config_.prefix}});
}

void
EdgeNode::pull_input(const Interest& interest, const TaskName& task, AppContext& ctx)
{
  const auto& params = *interest.parameters;
  if (!params.device_prefix || !params.input_size_bytes || *params.input_size_bytes == 0) {
    fail_task(interest, task, "missing-input", ctx);
    return;
  }
  const std::string key = task.offload_form().to_uri();
  if (pulls_.count(key) > 0) {
    // Retransmitted task Interest while its input is still being pulled.
    return;
  }

  PullState ps;
  ps.task_interest = interest;
  ps.task = task.offload_form();
  ps.device_prefix = *params.device_prefix;
  ps.total_size = *params.input_size_bytes;
  const auto n = segment_count(ps.total_size, config_.segment_bytes);
  ps.segments.resize(n);
  ps.attempts.assign(n, 0);
  ps.timeout = 2 * ctx.path_rtt(ps.device_prefix);
  if (ps.timeout <= Duration{0}) {
    ps.timeout = std::chrono::milliseconds{100};
  }

  Name seg_prefix = input_segment_name(ps.device_prefix, ps.task.service, ps.task.hash_hex, 0);
  seg_prefix = seg_prefix.prefix(seg_prefix.size() - 1);
  pull_by_segment_prefix_[seg_prefix] = key;
  pulls_.emplace(key, std::move(ps));

  ctx.trace("en_pull", interest.name,
            ordered_json{{"instance", interest.instance}, {"segments", n}});
  for (std::uint64_t s = 0; s < n; ++s) {
    send_segment_request(key, s, ctx);
  }
}

void
EdgeNode::send_segment_request(const std::string& key, std::uint64_t segment, AppContext& ctx)
{
  auto& ps = pulls_.at(key);
  Interest req;
  req.name = input_segment_name(ps.device_prefix, ps.task.service, ps.task.hash_hex, segment);
  req.instance = ps.task_interest.instance;
  const std::uint32_t attempt = ++ps.attempts[segment];
  ++counters_.pull_packets;
  ctx.send_interest(std::move(req));
  ctx.schedule(ps.timeout, [this, key, segment, attempt](AppContext& c) {
    on_segment_timeout(key, segment, attempt, c);
  });
}

void
EdgeNode::on_segment_timeout(const std::string& key, std::uint64_t segment,
                             std::uint32_t attempt, AppContext& ctx)
{
  auto it = pulls_.find(key);
  if (it == pulls_.end()) {
    return;
  }
  auto& ps = it->second;
  if (ps.segments[segment] || ps.attempts[segment] != attempt) {
    return;
  }
  if (attempt <= config_.max_retransmissions) {
    send_segment_request(key, segment, ctx);
    return;
  }
  Interest original = ps.task_interest;
  TaskName task = ps.task;
  Name seg_prefix = input_segment_name(ps.device_prefix, ps.task.service, ps.task.hash_hex, 0);
  pull_by_segment_prefix_.erase(seg_prefix.prefix(seg_prefix.size() - 1));
  pulls_.erase(it);
  fail_task(original, task, "input-unavailable", ctx);
}

void
EdgeNode::on_data(const Data& data, AppContext& ctx)
{
  if (data.name.size() < 1) {
    return;
  }
  if (std::holds_alternative<InputSegment>(data.payload) ||
      std::holds_alternative<NegativeResponse>(data.payload)) {
    on_segment(data, ctx);
  }
  // Acks for pushed results need no handling.
}

void
EdgeNode::on_segment(const Data& data, AppContext& ctx)
{
  if (data.name.size() < 4) {
    return;
  }
  const Name seg_prefix = data.name.prefix(data.name.size() - 1);
  auto pk = pull_by_segment_prefix_.find(seg_prefix);
  if (pk == pull_by_segment_prefix_.end()) {
    return;
  }
  const std::string key = pk->second;
  auto it = pulls_.find(key);
  if (it == pulls_.end()) {
    return;
  }
  auto& ps = it->second;

  if (const auto* neg = std::get_if<NegativeResponse>(&data.payload)) {
    Interest original = ps.task_interest;
    TaskName task = ps.task;
    pull_by_segment_prefix_.erase(pk);
    pulls_.erase(it);
    fail_task(original, task, "input-" + neg->reason, ctx);
    return;
  }

  const std::string& last = data.name[data.name.size() - 1];
  std::uint64_t seg = 0;
  auto [ptr, ec] = std::from_chars(last.data(), last.data() + last.size(), seg);
  if (ec != std::errc{} || ptr != last.data() + last.size() || seg >= ps.segments.size() ||
      ps.segments[seg]) {
    return;
  }
  ps.segments[seg] = std::get<InputSegment>(data.payload).bytes;
  if (++ps.received < ps.segments.size()) {
    return;
  }

  std::vector<std::uint8_t> bytes;
  bytes.reserve(ps.total_size);
  for (auto& s : ps.segments) {
    bytes.insert(bytes.end(), s->begin(), s->end());
  }
  Interest original = std::move(ps.task_interest);
  TaskName task = std::move(ps.task);
  pull_by_segment_prefix_.erase(pk);
  pulls_.erase(it);

  FeatureVector input;
  try {
    input = deserialize_input(bytes);
  }
  catch (const DegenerateInputError&) {
    fail_task(original, task, "input-corrupt", ctx);
    return;
  }
  process_task(original, task, input, ctx);
}

} // namespace reservoir
