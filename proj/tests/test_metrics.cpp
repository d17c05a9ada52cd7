#include "doctest.h"

#include "reservoir/config.hpp"
#include "reservoir/metrics.hpp"
#include "reservoir/sim.hpp"

#include <random>
#include <sstream>

using namespace reservoir;
using namespace std::chrono_literals;

namespace {

SessionRecord
session(InstanceId id, CompletionSource src, double ms, std::int64_t own, std::int64_t result,
        InstanceId producer)
{
  SessionRecord s;
  s.instance = id;
  s.start = 0us;
  s.end = from_ms(ms);
  s.source = src;
  s.threshold = 0.9;
  s.own_label = own;
  s.result_label = result;
  s.producer = producer;
  return s;
}

WorkloadTask
wtask(InstanceId id, std::vector<double> v, std::int64_t label)
{
  WorkloadTask t;
  t.instance = id;
  t.input = FeatureVector{std::move(v), label};
  return t;
}

EnArrival
arrival(const std::string& en, InstanceId id, std::vector<std::uint32_t> hash, ArrivalOutcome o,
        double threshold = 0.9)
{
  EnArrival a;
  a.en = en;
  a.service = Name("/s");
  a.instance = id;
  a.hash = ConcatenatedHash{std::move(hash), 1};
  a.outcome = o;
  a.threshold = threshold;
  return a;
}

StoreEvent
stored(const std::string& en, InstanceId id)
{
  return StoreEvent{0us, en, Name("/s"), id, true};
}

} // namespace

TEST_CASE("completion summaries")
{
  auto s = summarize_ms({5, 1, 4, 2, 3});
  CHECK(s.count == 5);
  CHECK(s.mean_ms == 3.0);
  CHECK(s.median_ms == 3.0);
  CHECK(s.p95_ms == 5.0);
  CHECK(s.min_ms == 1.0);
  CHECK(s.max_ms == 5.0);
  std::vector<double> hundred;
  for (int i = 1; i <= 100; ++i) {
    hundred.push_back(i);
  }
  auto h = summarize_ms(hundred);
  CHECK(h.median_ms == 50.5);
  CHECK(h.p95_ms == 95.0);
  CHECK(summarize_ms({}).count == 0);
}

TEST_CASE("report breakdown, accuracy and ratios")
{
  RunLog log;
  log.sessions = {
    session(1, CompletionSource::EnScratch, 100, 1, 1, 1),
    session(2, CompletionSource::EnReuse, 20, 1, 1, 1),
    session(3, CompletionSource::EnReuse, 20, 2, 1, 1),
    session(4, CompletionSource::LocalCs, 2, 1, 1, 1),
    session(5, CompletionSource::PitAggregate, 100, 1, 1, 1),
  };
  SessionRecord failed;
  failed.instance = 6;
  failed.failed = true;
  log.sessions.push_back(failed);
  log.rfib_lookups = {{1, 1}, {2, 1}, {3, 1}};

  auto r = compute_report(log, Workload{});
  CHECK(r.sessions == 6);
  CHECK(r.finished == 5);
  CHECK(r.failed == 1);
  double total = 0.0;
  for (const auto& [src, pct] : r.breakdown_pct) {
    total += pct;
  }
  CHECK(total == doctest::Approx(100.0).epsilon(1e-4));
  CHECK(r.breakdown_pct[CompletionSource::EnScratch] == 20.0);
  CHECK(r.percent_reuse == 80.0);
  CHECK(r.accuracy.reused == 4);
  CHECK(r.accuracy.correct == 3);
  CHECK(*r.accuracy.accuracy() == 0.75);
  CHECK(*r.ratios.scratch_over_en == doctest::Approx(5.0));
  CHECK(*r.ratios.scratch_over_cs == doctest::Approx(50.0));
  CHECK(r.rfib_lookups == 3);
  CHECK(r.rfib_instances == 3);
  CHECK(r.max_rfib_lookups_per_instance == 1);

  std::ostringstream out;
  write_breakdown_csv(out, r);
  CHECK(out.str().rfind("source,sessions,percent\n", 0) == 0);
}

TEST_CASE("all-scratch runs have no ratios or accuracy")
{
  RunLog log;
  log.sessions = {session(1, CompletionSource::EnScratch, 100, 1, 1, 1)};
  auto r = compute_report(log, Workload{});
  CHECK_FALSE(r.ratios.scratch_over_en);
  CHECK_FALSE(r.ratios.scratch_over_cs);
  CHECK_FALSE(r.accuracy.accuracy());
  CHECK(r.percent_reuse == 0.0);
}

TEST_CASE("deadline misses")
{
  auto s = session(1, CompletionSource::EnScratch, 100, 1, 1, 1);
  s.deadline = 50ms;
  CHECK(s.deadline_missed());
  s.deadline = 200ms;
  CHECK_FALSE(s.deadline_missed());
}

TEST_CASE("forwarding error replay")
{
  Workload w;
  w.tasks = {wtask(1, {1, 0}, 0), wtask(2, {1, 0.01}, 0), wtask(3, {0.99, 0.05}, 0),
             wtask(4, {0, 1}, 1)};
  RunLog log;
  // Task 1 executes at A. Task 2 lands at B, shares a bucket with 1: an error.
  // Task 3 lands at B with no shared bucket: similar elsewhere but no error.
  // Task 4 lands at B and nothing similar exists.
  log.en_events = {
    arrival("A", 1, {10, 20}, ArrivalOutcome::Scratch),
    stored("A", 1),
    arrival("B", 2, {10, 99}, ArrivalOutcome::Scratch),
    arrival("B", 3, {11, 98}, ArrivalOutcome::Scratch),
    arrival("B", 4, {12, 20}, ArrivalOutcome::Scratch),
    arrival("A", 2, {10, 99}, ArrivalOutcome::Reuse),
  };
  auto f = forwarding_error_rate(log, w);
  CHECK(f.arrivals == 5);
  CHECK(f.errors == 1);
  CHECK(f.similar_elsewhere == 2);
  CHECK(f.rate() == doctest::Approx(0.2));

  // Removal from the store ends the error.
  log.en_events.insert(log.en_events.begin() + 2, StoreEvent{0us, "A", Name("/s"), 1, false});
  CHECK(forwarding_error_rate(log, w).errors == 0);
}

TEST_CASE("recall replay")
{
  Workload w;
  w.tasks = {wtask(1, {1, 0}, 0), wtask(2, {0, 1}, 1), wtask(3, {0.9, 0.1}, 0)};
  RunLog log;
  log.en_events = {stored("A", 1), stored("A", 2)};
  auto hit = arrival("A", 3, {0, 0}, ArrivalOutcome::Reuse);
  hit.best_similarity = cosine_similarity(w.tasks[2].input, w.tasks[0].input);
  auto miss = arrival("A", 3, {0, 0}, ArrivalOutcome::Scratch);
  miss.best_similarity = cosine_similarity(w.tasks[2].input, w.tasks[1].input);
  auto none = arrival("A", 3, {0, 0}, ArrivalOutcome::Scratch);
  log.en_events.push_back(hit);
  log.en_events.push_back(miss);
  log.en_events.push_back(none);
  log.en_events.push_back(arrival("C", 3, {0, 0}, ArrivalOutcome::Scratch));
  auto r = replay_recall(log, w);
  CHECK(r.queries == 3);
  CHECK(r.hits == 1);
}

TEST_CASE("LSH recall against brute force")
{
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  const std::size_t dim = 16;
  HashFamily f(HashFamilyConfig::make(3, 6, dim, 2));
  ReuseStore st(3, 6, 1000);
  std::vector<FeatureVector> inputs;
  for (std::uint64_t id = 1; id <= 300; ++id) {
    FeatureVector v;
    for (std::size_t j = 0; j < dim; ++j) {
      v.values.push_back(n(rng));
    }
    inputs.push_back(v);
    st.insert(StoredTask{id, Name("/s"), v, hash_vector(f, v), 0, 0us});
  }
  CHECK(*lsh_recall(st, f, inputs, 0).recall() == 1.0);

  std::vector<FeatureVector> fresh;
  for (int i = 0; i < 50; ++i) {
    FeatureVector v;
    for (std::size_t j = 0; j < dim; ++j) {
      v.values.push_back(n(rng));
    }
    fresh.push_back(v);
  }
  // Probing the whole table is brute force.
  CHECK(*lsh_recall(st, f, fresh, 6).recall() == 1.0);
  const auto r0 = *lsh_recall(st, f, fresh, 0).recall();
  const auto r1 = *lsh_recall(st, f, fresh, 1).recall();
  CHECK(r1 >= r0);
  ReuseStore empty(3, 6, 10);
  CHECK(*lsh_recall(empty, f, fresh, 1).recall() == 0.0);
}

TEST_CASE("single-EN and single-table runs have no forwarding errors")
{
  auto base = parse_config(R"(
seed: 4
hash: {num_tables: 1, bits_per_table: 12, dimension: 32}
topology: {kind: generated, routers: 12, ens: 4, devices: 8}
services: [/a]
workload: {count: 600, correlation: moderate, mean_interarrival_ms: 2}
)");
  {
    Simulation sim(base);
    sim.run();
    auto r = compute_report(sim.log(), sim.workload());
    CHECK(r.forwarding.arrivals > 0);
    CHECK(r.forwarding.errors == 0);
    CHECK(r.max_rfib_lookups_per_instance == 1);
  }
  base.hash = HashFamilyConfig::make(5, 12, 32, 1);
  base.topology.params.ens = 1;
  {
    Simulation sim(base);
    sim.run();
    auto r = compute_report(sim.log(), sim.workload());
    CHECK(r.forwarding.errors == 0);
    CHECK(r.forwarding.similar_elsewhere == 0);
    // Scratch always pays execution; EN reuse pays only a search.
    CHECK(r.completion[CompletionSource::EnScratch].mean_ms >=
          r.completion[CompletionSource::EnReuse].mean_ms);
    CHECK(r.completion[CompletionSource::EnScratch].min_ms >= 70.0);
  }
}
