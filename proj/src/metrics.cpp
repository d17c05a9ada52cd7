#include "reservoir/metrics.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace reservoir {

namespace {

constexpr double kSimilarityEps = 1e-12;

/// Instance id to input vector.
std::map<InstanceId, const FeatureVector*>
index_inputs(const Workload& workload)
{
  std::map<InstanceId, const FeatureVector*> out;
  for (const auto& t : workload.tasks) {
    out.emplace(t.instance, &t.input);
  }
  return out;
}

const FeatureVector&
input_of(const std::map<InstanceId, const FeatureVector*>& inputs, InstanceId id)
{
  auto it = inputs.find(id);
  if (it == inputs.end()) {
    throw SimulationError("no workload input for instance " + std::to_string(id));
  }
  return *it->second;
}

using StoreKey = std::pair<std::string, Name>;

/// Walks EN events in order, keeping store membership current.
template<typename OnArrival>
void
replay(const RunLog& log, OnArrival&& on_arrival)
{
  std::map<StoreKey, std::set<std::uint64_t>> stores;
  for (const auto& rec : log.en_events) {
    if (const auto* s = std::get_if<StoreEvent>(&rec)) {
      auto& members = stores[{s->en, s->service}];
      if (s->inserted) {
        members.insert(s->stored_id);
      }
      else {
        members.erase(s->stored_id);
      }
      continue;
    }
    on_arrival(std::get<EnArrival>(rec), stores);
  }
}

bool
shares_bucket(const ConcatenatedHash& a, const ConcatenatedHash& b)
{
  const std::size_t n = std::min(a.per_table.size(), b.per_table.size());
  for (std::size_t t = 0; t < n; ++t) {
    if (a.per_table[t] == b.per_table[t]) {
      return true;
    }
  }
  return false;
}

} // namespace

AccuracyStats
reuse_accuracy(std::span<const SessionRecord> sessions)
{
  AccuracyStats a;
  for (const auto& s : sessions) {
    if (s.failed || !s.result_label || s.producer == s.instance) {
      continue;
    }
    ++a.reused;
    if (*s.result_label == s.own_label) {
      ++a.correct;
    }
  }
  return a;
}

ForwardingErrorStats
forwarding_error_rate(const RunLog& log, const Workload& workload)
{
  const auto inputs = index_inputs(workload);
  std::map<InstanceId, ConcatenatedHash> hashes;
  for (const auto& rec : log.en_events) {
    if (const auto* a = std::get_if<EnArrival>(&rec)) {
      if (!a->hash.per_table.empty()) {
        hashes.emplace(a->instance, a->hash);
      }
    }
  }

  ForwardingErrorStats out;
  replay(log, [&](const EnArrival& a, const std::map<StoreKey, std::set<std::uint64_t>>& stores) {
    ++out.arrivals;
    if (a.outcome != ArrivalOutcome::Scratch) {
      return;
    }
    const auto& query = input_of(inputs, a.instance);
    bool error = false;
    bool similar = false;
    for (const auto& [key, members] : stores) {
      if (key.first == a.en || key.second != a.service) {
        continue;
      }
      for (auto id : members) {
        const double sim = cosine_similarity(query, input_of(inputs, id));
        if (sim < a.threshold) {
          continue;
        }
        similar = true;
        auto h = hashes.find(id);
        if (h != hashes.end() && shares_bucket(h->second, a.hash)) {
          error = true;
          break;
        }
      }
      if (error) {
        break;
      }
    }
    out.errors += error ? 1 : 0;
    out.similar_elsewhere += similar ? 1 : 0;
  });
  return out;
}

RecallStats
replay_recall(const RunLog& log, const Workload& workload)
{
  const auto inputs = index_inputs(workload);
  RecallStats out;
  replay(log, [&](const EnArrival& a, const std::map<StoreKey, std::set<std::uint64_t>>& stores) {
    if (a.outcome == ArrivalOutcome::NoReuse || a.outcome == ArrivalOutcome::Failed) {
      return;
    }
    auto it = stores.find({a.en, a.service});
    if (it == stores.end() || it->second.empty()) {
      return;
    }
    const auto& query = input_of(inputs, a.instance);
    double best = -2.0;
    for (auto id : it->second) {
      best = std::max(best, cosine_similarity(query, input_of(inputs, id)));
    }
    ++out.queries;
    if (a.best_similarity && std::abs(*a.best_similarity - best) <= kSimilarityEps) {
      ++out.hits;
    }
  });
  return out;
}

RecallStats
lsh_recall(const ReuseStore& store, const HashFamily& family,
           std::span<const FeatureVector> queries, std::uint32_t radius)
{
  const auto all = store.all();
  RecallStats out;
  for (const auto& q : queries) {
    ++out.queries;
    if (all.empty()) {
      continue;
    }
    double best = -2.0;
    for (const auto* t : all) {
      best = std::max(best, cosine_similarity(q, t->input));
    }
    const auto cand = store.nearest(q, hash_vector(family, q), radius);
    if (cand && std::abs(cand->similarity - best) <= kSimilarityEps) {
      ++out.hits;
    }
  }
  return out;
}

SourceStats
summarize_ms(std::vector<double> xs)
{
  SourceStats s;
  s.count = xs.size();
  if (xs.empty()) {
    return s;
  }
  std::sort(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
  }
  const std::size_t n = xs.size();
  s.mean_ms = sum / static_cast<double>(n);
  s.median_ms = n % 2 == 1 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95_ms = xs[std::max<std::size_t>(rank, 1) - 1];
  s.min_ms = xs.front();
  s.max_ms = xs.back();
  return s;
}

CompletionRatios
completion_ratios(const MetricsReport& r)
{
  CompletionRatios out;
  auto scratch = r.completion.find(CompletionSource::EnScratch);
  if (scratch == r.completion.end() || scratch->second.count == 0) {
    return out;
  }
  const double s = scratch->second.mean_ms;

  double cs_sum = 0.0;
  std::size_t cs_n = 0;
  for (auto src : {CompletionSource::LocalCs, CompletionSource::NetworkCs}) {
    if (auto it = r.completion.find(src); it != r.completion.end()) {
      cs_sum += it->second.mean_ms * static_cast<double>(it->second.count);
      cs_n += it->second.count;
    }
  }
  if (cs_n > 0 && cs_sum > 0.0) {
    out.scratch_over_cs = s / (cs_sum / static_cast<double>(cs_n));
  }
  if (auto it = r.completion.find(CompletionSource::EnReuse);
      it != r.completion.end() && it->second.count > 0 && it->second.mean_ms > 0.0) {
    out.scratch_over_en = s / it->second.mean_ms;
  }
  return out;
}

MetricsReport
compute_report(const RunLog& log, const Workload& workload)
{
  MetricsReport r;
  r.sessions = log.sessions.size();
  std::map<CompletionSource, std::vector<double>> samples;
  std::map<CompletionSource, std::vector<SessionRecord>> by_source;
  std::map<double, std::vector<SessionRecord>> by_threshold;
  for (const auto& s : log.sessions) {
    if (s.failed || !s.end || !s.source) {
      ++r.failed;
      continue;
    }
    ++r.finished;
    if (s.deadline_missed()) {
      ++r.deadline_missed;
    }
    samples[*s.source].push_back(to_ms(*s.end - s.start));
    by_source[*s.source].push_back(s);
    by_threshold[s.threshold].push_back(s);
  }
  for (auto src : kAllCompletionSources) {
    auto it = samples.find(src);
    r.completion[src] = summarize_ms(it == samples.end() ? std::vector<double>{} : it->second);
    const double n = static_cast<double>(r.completion[src].count);
    r.breakdown_pct[src] = r.finished == 0 ? 0.0 : 100.0 * n / static_cast<double>(r.finished);
    auto bs = by_source.find(src);
    r.accuracy_by_source[src] =
      bs == by_source.end() ? AccuracyStats{} : reuse_accuracy(bs->second);
  }
  r.percent_reuse = r.finished == 0 ? 0.0 : 100.0 - r.breakdown_pct[CompletionSource::EnScratch];
  r.accuracy = reuse_accuracy(log.sessions);
  for (const auto& [threshold, sessions] : by_threshold) {
    r.accuracy_by_threshold[threshold] = reuse_accuracy(sessions);
  }
  r.forwarding = forwarding_error_rate(log, workload);
  r.recall = replay_recall(log, workload);
  r.en_load = log.en_counters;
  r.ratios = completion_ratios(r);
  for (const auto& [instance, n] : log.rfib_lookups) {
    r.rfib_lookups += n;
    r.max_rfib_lookups_per_instance = std::max(r.max_rfib_lookups_per_instance, n);
  }
  r.rfib_instances = log.rfib_lookups.size();
  return r;
}

namespace {

std::string
opt(const std::optional<double>& v)
{
  return v ? fmt::format("{:.6f}", *v) : std::string{};
}

} // namespace

void
write_completion_csv(std::ostream& out, const MetricsReport& r)
{
  out << "source,count,mean_ms,median_ms,p95_ms,min_ms,max_ms\n";
  for (const auto& [src, s] : r.completion) {
    fmt::print(out, "{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", to_string(src), s.count,
               s.mean_ms, s.median_ms, s.p95_ms, s.min_ms, s.max_ms);
  }
}

void
write_breakdown_csv(std::ostream& out, const MetricsReport& r)
{
  out << "source,sessions,percent\n";
  for (const auto& [src, pct] : r.breakdown_pct) {
    fmt::print(out, "{},{},{:.6f}\n", to_string(src), r.completion.at(src).count, pct);
  }
}

void
write_accuracy_csv(std::ostream& out, const MetricsReport& r)
{
  out << "scope,key,reused,correct,accuracy\n";
  fmt::print(out, "all,,{},{},{}\n", r.accuracy.reused, r.accuracy.correct,
             opt(r.accuracy.accuracy()));
  for (const auto& [src, a] : r.accuracy_by_source) {
    fmt::print(out, "source,{},{},{},{}\n", to_string(src), a.reused, a.correct,
               opt(a.accuracy()));
  }
  for (const auto& [th, a] : r.accuracy_by_threshold) {
    fmt::print(out, "threshold,{:.4f},{},{},{}\n", th, a.reused, a.correct, opt(a.accuracy()));
  }
}

void
write_forwarding_error_csv(std::ostream& out, const MetricsReport& r)
{
  out << "arrivals,errors,rate,similar_elsewhere,similar_elsewhere_rate\n";
  const auto& f = r.forwarding;
  fmt::print(out, "{},{},{:.6f},{},{:.6f}\n", f.arrivals, f.errors, f.rate(), f.similar_elsewhere,
             f.similar_elsewhere_rate());
}

void
write_en_load_csv(std::ostream& out, const MetricsReport& r)
{
  out << "en,tasks_received,reuse_hits,scratch_executions,joined_pending,evictions,pull_packets,"
         "result_fetches,failures\n";
  for (const auto& [en, c] : r.en_load) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", en, c.tasks_received, c.reuse_hits,
               c.scratch_executions, c.joined_pending, c.evictions, c.pull_packets,
               c.result_fetches, c.failures);
  }
}

void
write_recall_csv(std::ostream& out, const MetricsReport& r)
{
  out << "queries,hits,recall\n";
  fmt::print(out, "{},{},{}\n", r.recall.queries, r.recall.hits, opt(r.recall.recall()));
}

void
write_sessions_csv(std::ostream& out, std::span<const SessionRecord> sessions)
{
  out << "instance,device,name,start_us,end_us,latency_us,source,threshold,own_label,"
         "result_label,producer,failed,deadline_missed\n";
  for (const auto& s : sessions) {
    const std::string end = s.end ? std::to_string(s.end->count()) : std::string{};
    const std::string latency = s.end ? std::to_string((*s.end - s.start).count()) : std::string{};
    const std::string result = s.result_label ? std::to_string(*s.result_label) : std::string{};
    fmt::print(out, "{},{},{},{},{},{},{},{:.4f},{},{},{},{},{}\n", s.instance, s.device, s.name,
               s.start.count(), end, latency, s.source ? to_string(*s.source) : "", s.threshold,
               s.own_label, result, s.producer, s.failed ? 1 : 0, s.deadline_missed() ? 1 : 0);
  }
}

void
write_summary(std::ostream& out, const MetricsReport& r)
{
  fmt::print(out, "sessions            {}\n", r.sessions);
  fmt::print(out, "finished            {}\n", r.finished);
  fmt::print(out, "failed              {}\n", r.failed);
  fmt::print(out, "deadline missed     {}\n", r.deadline_missed);
  fmt::print(out, "percent of reuse    {:.2f}%\n", r.percent_reuse);
  for (const auto& [src, pct] : r.breakdown_pct) {
    const auto& c = r.completion.at(src);
    fmt::print(out, "  {:<14} {:>6} sessions {:>7.2f}%  mean {:.3f} ms\n", to_string(src),
               c.count, pct, c.mean_ms);
  }
  const auto acc = r.accuracy.accuracy();
  fmt::print(out, "reuse accuracy      {}\n",
             acc ? fmt::format("{:.4f} ({}/{})", *acc, r.accuracy.correct, r.accuracy.reused)
                 : std::string("n/a"));
  fmt::print(out, "forwarding error    {:.4f} ({}/{}), similar elsewhere {:.4f}\n",
             r.forwarding.rate(), r.forwarding.errors, r.forwarding.arrivals,
             r.forwarding.similar_elsewhere_rate());
  const auto rec = r.recall.recall();
  fmt::print(out, "lsh recall          {}\n",
             rec ? fmt::format("{:.4f} ({}/{})", *rec, r.recall.hits, r.recall.queries)
                 : std::string("n/a"));
  fmt::print(out, "scratch/cs ratio    {}\n",
             r.ratios.scratch_over_cs ? fmt::format("{:.3f}", *r.ratios.scratch_over_cs) : "n/a");
  fmt::print(out, "scratch/en ratio    {}\n",
             r.ratios.scratch_over_en ? fmt::format("{:.3f}", *r.ratios.scratch_over_en) : "n/a");
  fmt::print(out, "rfib lookups        {} over {} instances (max {} per instance)\n",
             r.rfib_lookups, r.rfib_instances, r.max_rfib_lookups_per_instance);
}

} // namespace reservoir
