#include "reservoir/forwarder.hpp"

namespace reservoir {

void
ProcessingDelays::validate() const
{
  if (fib_min.count() < 0 || fib_min > fib_max) {
    throw ConfigError("FIB processing delay range is invalid");
  }
  if (rfib_min.count() < 0 || rfib_min > rfib_max) {
    throw ConfigError("rFIB processing delay range is invalid");
  }
}

std::string_view
to_string(InterestDecision d)
{
  switch (d) {
    case InterestDecision::CsHit:
      return "cs_hit";
    case InterestDecision::Aggregated:
      return "aggregate";
    case InterestDecision::ForwardedByHint:
      return "forward_hint";
    case InterestDecision::ForwardedByRfib:
      return "forward_rfib";
    case InterestDecision::ForwardedByFib:
      return "forward_fib";
    case InterestDecision::DroppedNoRoute:
      return "drop_no_route";
    case InterestDecision::DroppedMalformed:
      return "drop_malformed";
  }
  return "unknown";
}

std::string_view
to_string(DataDecision d)
{
  return d == DataDecision::Forwarded ? "data_forward" : "data_unsolicited";
}

Forwarder::Forwarder(std::string node_id, Options options)
  : node_id_(std::move(node_id))
  , options_(options)
  , cs_(options.cs_capacity)
  , rng_(options.seed)
{
  options_.delays.validate();
}

Duration
Forwarder::draw_delay(ProcessingPath path)
{
  const auto& d = options_.delays;
  const auto [lo, hi] = path == ProcessingPath::Rfib ? std::pair{d.rfib_min, d.rfib_max}
                                                     : std::pair{d.fib_min, d.fib_max};
  std::uniform_int_distribution<std::int64_t> dist(lo.count(), hi.count());
  return Duration{dist(rng_)};
}

void
Forwarder::forward_by_fib(InterestOutcome& out, const Interest& interest, const Name& lookup_name,
                          InterestDecision decision)
{
  const FibEntry* entry = fib_.longest_prefix_match(lookup_name);
  if (entry == nullptr) {
    pit_.erase(interest.name);
    out.decision = InterestDecision::DroppedNoRoute;
    out.drop_reason = "no FIB match for " + lookup_name.to_uri();
    ++counters_.dropped;
    return;
  }
  out.decision = decision;
  out.out.push_back({entry->faces.front(), interest});
  ++counters_.forwarded;
}

InterestOutcome
Forwarder::on_interest(const Interest& interest, FaceId in_face, SimTime now)
{
  ++counters_.interests;
  pit_expire(now);
  InterestOutcome out;

  // (1) Content Store, exact name.
  if (const Data* cached = cs_.find(interest.name)) {
    out.decision = InterestDecision::CsHit;
    out.processing = draw_delay(ProcessingPath::Fib);
    out.out.push_back({in_face, *cached});
    ++counters_.cs_hits;
    return out;
  }

  // (2) PIT: aggregate onto a pending entry, or create one.
  if (PitEntry* entry = pit_.find(interest.name)) {
    if (entry->downstream_faces.count(in_face) == 0) {
      entry->downstream_faces.insert(in_face);
      entry->expiry = std::max(entry->expiry, now + options_.pit_lifetime);
      out.decision = InterestDecision::Aggregated;
      out.processing = draw_delay(ProcessingPath::Fib);
      ++counters_.aggregated;
      return out;
    }
    entry->expiry = now + options_.pit_lifetime;
    out.retransmission = true;
  }
  else {
    pit_.insert(interest.name, in_face, now, options_.pit_lifetime, interest.instance);
  }

  // (3) A forwarding hint means the rFIB was already consulted upstream.
  if (interest.forwarding_hint) {
    out.processing = draw_delay(ProcessingPath::Fib);
    forward_by_fib(out, interest, interest.forwarding_hint->en_prefix,
                   InterestDecision::ForwardedByHint);
    return out;
  }

  ParsedName parsed;
  try {
    parsed = parse_name(interest.name, fib_.edge_node_prefixes());
  }
  catch (const MalformedNameError& e) {
    pit_.erase(interest.name);
    out.decision = InterestDecision::DroppedMalformed;
    out.processing = draw_delay(ProcessingPath::Fib);
    out.drop_reason = e.what();
    ++counters_.dropped;
    return out;
  }
  out.name_class = parsed.kind;

  // (4) Reuse-aware forwarding, once per task.
  if (parsed.kind == NameClass::ReuseTask && !rfib_.empty() &&
      rfib_.has_service(parsed.task->service)) {
    out.path = ProcessingPath::Rfib;
    out.processing = draw_delay(ProcessingPath::Rfib);
    ++counters_.rfib_lookups;
    RfibMatch match;
    try {
      match = rfib_select(rfib_, *parsed.task);
    }
    catch (const MalformedNameError& e) {
      pit_.erase(interest.name);
      out.decision = InterestDecision::DroppedMalformed;
      out.drop_reason = e.what();
      ++counters_.dropped;
      return out;
    }
    Interest hinted = interest;
    hinted.forwarding_hint = ForwardingHint{match.en_prefix};
    out.rfib_match = match;
    forward_by_fib(out, hinted, match.en_prefix, InterestDecision::ForwardedByRfib);
    return out;
  }

  // (5) Legacy pipeline.
  out.processing = draw_delay(ProcessingPath::Fib);
  forward_by_fib(out, interest, interest.name, InterestDecision::ForwardedByFib);
  return out;
}

DataOutcome
Forwarder::on_data(const Data& data, FaceId in_face, SimTime now)
{
  ++counters_.data_in;
  pit_expire(now);
  DataOutcome out;
  PitEntry* entry = pit_.find(data.name);
  if (entry == nullptr) {
    out.decision = DataDecision::Unsolicited;
    ++counters_.data_unsolicited;
    return out;
  }

  out.decision = DataDecision::Forwarded;
  out.processing = draw_delay(ProcessingPath::Fib);
  if (data.carries_result() && cs_.capacity() > 0) {
    out.evicted = cs_.insert(data, now);
    out.cached = true;
  }
  for (FaceId face : entry->downstream_faces) {
    if (face == in_face) {
      continue;
    }
    out.out.push_back({face, data});
    ++counters_.data_copies_out;
  }
  pit_.erase(data.name);
  return out;
}

std::vector<Name>
Forwarder::pit_expire(SimTime now)
{
  return pit_.expire(now);
}

} // namespace reservoir
