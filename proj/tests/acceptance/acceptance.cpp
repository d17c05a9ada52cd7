// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.

#include "reservoir/config.hpp"
#include "reservoir/control.hpp"
#include "reservoir/experiment.hpp"
#include "reservoir/metrics.hpp"
#include "reservoir/sim.hpp"

#include "json.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>

using namespace reservoir;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

struct Verdict
{
  bool pass = true;
  std::string detail;
};

int failures = 0;

template<typename F>
void
criterion(int id, const std::string& title, F&& check)
{
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  }
  catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += v.pass ? 0 : 1;
  fmt::print("{} {} {} [{:.1f} s] {}\n", v.pass ? "PASS" : "FAIL", id, title, secs, v.detail);
  std::fflush(stdout);
}

const fs::path kConfigs = RESERVOIR_CONFIG_DIR;

MetricsReport
run(const SimConfig& c, std::optional<Workload> w = std::nullopt, RunLog* log_out = nullptr,
    std::ostream* trace = nullptr)
{
  Simulation sim(c, std::move(w));
  sim.set_trace(trace);
  sim.run();
  if (log_out) {
    *log_out = sim.log();
  }
  return compute_report(sim.log(), sim.workload());
}

// Runs of the 5K-task high-correlation setup, shared by several criteria.
struct SweepKey
{
  double sigma;
  double threshold;
  std::uint32_t tables;
  std::uint64_t seed;
  auto operator<=>(const SweepKey&) const = default;
};

std::map<SweepKey, MetricsReport> sweep_cache;

const MetricsReport&
sweep_run(double sigma, double threshold, std::uint32_t tables, std::uint64_t seed)
{
  const SweepKey key{sigma, threshold, tables, seed};
  auto it = sweep_cache.find(key);
  if (it != sweep_cache.end()) {
    return it->second;
  }
  auto c = load_config(kConfigs / "paper_sim.yaml");
  c.seed = seed;
  c.workload.sigma = sigma;
  set_parameter(c, "similarity_threshold", fmt::format("{}", threshold));
  set_parameter(c, "num_tables", std::to_string(tables));
  return sweep_cache.emplace(key, run(c)).first->second;
}

const double kThresholds[] = {0.8, 0.9, 0.95, 0.99};
constexpr double kHighSigma = 0.01;

std::string
fmt_opt(const std::optional<double>& v)
{
  return v ? fmt::format("{:.4f}", *v) : std::string("n/a");
}

std::vector<double>
normalized(std::vector<double> v)
{
  double n = 0.0;
  for (double x : v) {
    n += x * x;
  }
  n = std::sqrt(n);
  for (auto& x : v) {
    x /= n;
  }
  return v;
}

// --- 1 ---------------------------------------------------------------------

Verdict
golden_rfib()
{
  auto entry = [](const char* en, std::vector<BucketRange> r) {
    RfibEntry e;
    e.service = Name("/OpenPose");
    e.en_prefix = Name(en);
    e.bits_per_table = 8;
    e.index_size_bytes = 1;
    e.bucket_ranges = std::move(r);
    return e;
  };
  // Table 1 bucket 0x6E and table 3 bucket 0x0F sit with EN1, table 2 bucket 0x81 with EN2.
  Rfib rfib;
  rfib.install(Name("/OpenPose"), {entry("/Paris/Louvre/EN1", {{0, 127}, {0, 127}, {0, 127}}),
                                   entry("/Paris/Louvre/EN2", {{128, 255}, {128, 255}, {128, 255}})});
  const auto task = parse_name("/OpenPose/task/6E810F").task;
  const auto m = rfib_select(rfib, *task);
  return {m.en_prefix == Name("/Paris/Louvre/EN1"),
          fmt::format("selected {} with {} of 3 tables", m.en_prefix.to_uri(), m.matched_tables)};
}

// --- 2 ---------------------------------------------------------------------

const char* kLineScenario = R"(
seed: 1
hash: {num_tables: 5, bits_per_table: 16, dimension: 64}
topology:
  kind: explicit
  nodes:
    - {id: d0, device: /dev/000}
    - {id: d1, device: /dev/001}
    - {id: d2, device: /dev/002}
    - {id: r0}
    - {id: r1, en: /edge/EN00}
  links:
    - {a: d0, b: r0, delay_ms: 2}
    - {a: d1, b: r0, delay_ms: 2}
    - {a: d2, b: r0, delay_ms: 2}
    - {a: r0, b: r1, delay_ms: 5}
services: [/detect]
edge:
  execution_ms: [85, 85]
  search_delay_ms: 1.7
device:
  hashing_delay_ms: 1.7
)";

Verdict
completion_ratios_check()
{
  const auto c = parse_config(kLineScenario);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  Workload w;
  auto add = [&](SimTime at, std::size_t device, const std::vector<double>& v, std::size_t label) {
    WorkloadTask t;
    t.instance = w.tasks.size() + 1;
    t.at = at;
    t.device = device;
    t.service = Name("/detect");
    t.input = FeatureVector{v, static_cast<std::int64_t>(label)};
    t.threshold = 0.9;
    t.cluster = label;
    w.tasks.push_back(std::move(t));
  };
  for (std::size_t k = 0; k < 40; ++k) {
    const auto center = random_unit_vector(64, rng);
    auto jitter = [&] {
      std::vector<double> v = center;
      for (auto& x : v) {
        x += noise(rng);
      }
      return normalized(v);
    };
    const auto a = jitter();
    const auto b = jitter();
    const SimTime base = SimTime{std::chrono::seconds{1}} * static_cast<int>(k);
    add(base, 0, a, k);          // executed from scratch
    add(base + 300ms, 1, b, k);  // similar input, reused at the EN
    add(base + 600ms, 0, a, k);  // same device again: local CS
    add(base + 700ms, 2, b, k);  // other device, same name as a reuse reply: router CS
    w.centers.push_back(center);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run(c, std::move(w));
  const double secs =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto en = r.ratios.scratch_over_en;
  const auto cs = r.ratios.scratch_over_cs;
  const bool pass = en && cs && *en >= 4.0 && *en <= 7.0 && *cs > *en && secs < 30.0;
  return {pass,
          fmt::format("scratch {:.2f} ms, EN reuse {:.2f} ms, CS {}/{} sessions; "
                      "scratch/EN {} in [4, 7], scratch/CS {}",
                      r.completion.at(CompletionSource::EnScratch).mean_ms,
                      r.completion.at(CompletionSource::EnReuse).mean_ms,
                      r.completion.at(CompletionSource::LocalCs).count,
                      r.completion.at(CompletionSource::NetworkCs).count, fmt_opt(en),
                      fmt_opt(cs))};
}

// --- 3 ---------------------------------------------------------------------

Verdict
reuse_monotonicity()
{
  std::string detail = "reuse%";
  bool pass = true;
  double prev = 101.0;
  for (double th : kThresholds) {
    const auto& r = sweep_run(kHighSigma, th, 5, 1);
    pass = pass && r.percent_reuse <= prev + 1e-9;
    prev = r.percent_reuse;
    detail += fmt::format(" {}:{:.2f}", th, r.percent_reuse);
  }
  detail += "; sigma=0 accuracy";
  for (double th : kThresholds) {
    const auto& r = sweep_run(0.0, th, 5, 1);
    const auto acc = r.accuracy.accuracy();
    pass = pass && acc && *acc == 1.0;
    detail += fmt::format(" {}:{}", th, fmt_opt(acc));
  }
  auto median_acc = [](double th) {
    std::vector<double> xs;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      xs.push_back(sweep_run(kHighSigma, th, 5, seed).accuracy.accuracy().value_or(1.0));
    }
    std::sort(xs.begin(), xs.end());
    return xs[1];
  };
  const double lo = median_acc(0.8);
  const double hi = median_acc(0.99);
  pass = pass && hi >= lo;
  detail += fmt::format("; sigma={} median accuracy 0.8:{:.4f} 0.99:{:.4f}", kHighSigma, lo, hi);
  return {pass, detail};
}

// --- 4 ---------------------------------------------------------------------

Verdict
reuse_volume()
{
  const auto c = load_config(kConfigs / "paper_sim.yaml");
  const auto& r = sweep_run(kHighSigma, 0.9, 5, 1);
  const double scratch = r.breakdown_pct.at(CompletionSource::EnScratch);
  std::string detail = fmt::format("store capacity {} for {} hot clusters; scratch {:.2f}% of {};",
                                   c.edge.store_capacity, c.workload.hot_clusters, scratch,
                                   r.finished);
  for (const auto& [src, pct] : r.breakdown_pct) {
    detail += fmt::format(" {} {:.2f}%", to_string(src), pct);
  }
  return {c.edge.store_capacity >= c.workload.hot_clusters && r.failed == 0 && scratch <= 50.0,
          detail};
}

// --- 5 ---------------------------------------------------------------------

Verdict
lsh_recall_check()
{
  WorkloadParams p;
  p.count = 20500;
  p.dimension = 128;
  p.correlation = Correlation::Moderate;
  p.services = {Name("/s")};
  p.seed = 5;
  const auto w = generate_workload(p, 1);
  const HashFamily five(HashFamilyConfig::make(5, 16, 128, 1));
  const HashFamily one(HashFamilyConfig::make(1, 16, 128, 1));
  ReuseStore s5(5, 16, 20000);
  ReuseStore s1(1, 16, 20000);
  for (std::size_t i = 0; i < 20000; ++i) {
    const auto& in = w.tasks[i].input;
    s5.insert(StoredTask{i + 1, Name("/s"), in, hash_vector(five, in), in.label, 0us});
    s1.insert(StoredTask{i + 1, Name("/s"), in, hash_vector(one, in), in.label, 0us});
  }
  std::vector<FeatureVector> fresh;
  std::vector<FeatureVector> dup;
  for (std::size_t i = 20000; i < 20500; ++i) {
    fresh.push_back(w.tasks[i].input);
    dup.push_back(w.tasks[(i - 20000) * 40].input);
  }
  const auto r5 = *lsh_recall(s5, five, fresh, kDefaultProbeRadius).recall();
  const auto r1 = *lsh_recall(s1, one, fresh, kDefaultProbeRadius).recall();
  const auto d5 = *lsh_recall(s5, five, dup, kDefaultProbeRadius).recall();
  const auto d1 = *lsh_recall(s1, one, dup, kDefaultProbeRadius).recall();
  return {r5 >= r1 && d5 == 1.0 && d1 == 1.0,
          fmt::format("20000 stored, 500 queries: recall 5 tables {:.4f}, 1 table {:.4f}; "
                      "duplicates {:.4f}/{:.4f}",
                      r5, r1, d5, d1)};
}

// --- 6 ---------------------------------------------------------------------

Verdict
forwarding_error_check()
{
  bool pass = true;
  std::string detail = "1 table errors";
  for (double th : kThresholds) {
    const auto& r = sweep_run(kHighSigma, th, 1, 1);
    pass = pass && r.forwarding.errors == 0;
    detail += fmt::format(" {}:{}", th, r.forwarding.errors);
  }
  detail += "; 5 tables mean rate over 5 seeds";
  double prev = 2.0;
  for (double th : kThresholds) {
    double sum = 0.0;
    double elsewhere = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto& f = sweep_run(kHighSigma, th, 5, seed).forwarding;
      sum += f.rate();
      elsewhere += f.similar_elsewhere_rate();
    }
    const double mean = sum / 5.0;
    pass = pass && mean <= prev + 0.02;
    prev = mean;
    detail += fmt::format(" {}:{:.4f} (any bucket {:.4f})", th, mean, elsewhere / 5.0);
  }
  return {pass, detail};
}

// --- 7 ---------------------------------------------------------------------

std::string
aggregation_topology(std::size_t n)
{
  std::string nodes = "    - {id: r0}\n    - {id: r1, en: /edge/EN00}\n";
  std::string links = "    - {a: r0, b: r1, delay_ms: 5}\n";
  std::string tasks;
  for (std::size_t i = 0; i < n + 1; ++i) {
    nodes += fmt::format("    - {{id: d{}, device: /dev/{:03}}}\n", i, i);
    links += fmt::format("    - {{a: d{}, b: r0, delay_ms: 2}}\n", i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    tasks += fmt::format("    - {{at_ms: 0, device: d{}, cluster: 0}}\n", i);
  }
  // Same device again after completion, then a similar task from the spare device.
  tasks += "    - {at_ms: 1000, device: d0, cluster: 0}\n";
  return fmt::format(R"(
seed: 1
hash: {{num_tables: 5, bits_per_table: 16, dimension: 32}}
topology:
  kind: explicit
  nodes:
{}  links:
{}services: [/detect]
workload:
  tasks:
{})",
                     nodes, links, tasks);
}

Verdict
pipeline_properties()
{
  std::string detail;
  bool pass = true;
  for (std::size_t n : {2u, 3u, 5u}) {
    const auto c = parse_config(aggregation_topology(n));
    std::ostringstream trace;
    RunLog log;
    const auto r = run(c, std::nullopt, &log, &trace);
    const auto name = log.sessions.front().name;
    std::size_t upstream = 0;
    std::size_t copies = 0;
    std::istringstream in(trace.str());
    for (std::string line; std::getline(in, line);) {
      const auto j = nlohmann::json::parse(line);
      if (j["node"] != "r0" || j["name"] != name) {
        continue;
      }
      const std::string ev = j["event"];
      if (ev.rfind("forward_", 0) == 0) {
        upstream += j["detail"]["out_faces"].size();
      }
      if (ev == "data_forward") {
        copies += j["detail"]["out_faces"].size();
      }
    }
    std::size_t arrivals = 0;
    for (const auto& e : log.en_events) {
      arrivals += std::holds_alternative<EnArrival>(e);
    }
    std::size_t aggregated = 0;
    for (const auto& s : log.sessions) {
      aggregated += s.source == CompletionSource::PitAggregate;
    }
    const auto& last = *std::max_element(
      log.sessions.begin(), log.sessions.end(),
      [](const auto& a, const auto& b) { return a.instance < b.instance; });
    const bool cs_ok = last.source == CompletionSource::LocalCs && arrivals == 1;
    const bool ok = upstream == 1 && copies == n && aggregated == n - 1 && cs_ok &&
                    r.rfib_lookups == r.rfib_instances && r.max_rfib_lookups_per_instance == 1;
    pass = pass && ok;
    detail += fmt::format("N={}: upstream {}, copies {}, EN arrivals {}, re-offer {}; ", n,
                          upstream, copies, arrivals, to_string(*last.source));
  }

  // Re-offer of a name whose reply crossed the router, from a different device.
  {
    auto c = parse_config(aggregation_topology(2));
    c.explicit_tasks = {
      ExplicitTask{0ms, "d0", Name("/detect"), 0, std::nullopt},
      ExplicitTask{500ms, "d1", Name("/detect"), 0, std::nullopt},
    };
    Simulation sim(c);
    auto* en = sim.edge_node_by_prefix(Name("/edge/EN00"));
    const auto& input = sim.workload().tasks.front().input;
    StoredTask seed;
    seed.id = 1000;
    seed.service = Name("/detect");
    seed.input = input;
    seed.hash = hash_vector(sim.family(), input);
    seed.result = input.label;
    en->store_result(seed);
    sim.run();
    const auto& s = sim.log().sessions;
    const bool ok = s.size() == 2 && s[0].source == CompletionSource::EnReuse &&
                    s[1].source == CompletionSource::NetworkCs &&
                    en->counters().tasks_received == 1;
    pass = pass && ok;
    detail += fmt::format("router CS re-offer {}; ", s.size() == 2 && s[1].source
                                                        ? std::string(to_string(*s[1].source))
                                                        : "missing");
  }

  // Network-wide: one rFIB lookup per instance that left its device.
  const auto& r = sweep_run(kHighSigma, 0.9, 5, 1);
  const bool once = r.rfib_lookups == r.rfib_instances && r.max_rfib_lookups_per_instance == 1;
  pass = pass && once;
  detail += fmt::format("5K run: {} lookups over {} distinct instances", r.rfib_lookups,
                        r.rfib_instances);
  return {pass, detail};
}

// --- 8 ---------------------------------------------------------------------

std::string
slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict
determinism()
{
  const auto root = fs::temp_directory_path() / "reservoir_acceptance_determinism";
  fs::remove_all(root);
  bool pass = true;
  std::size_t files = 0;
  std::string detail;
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".yaml") {
      continue;
    }
    const auto c = load_config(entry.path());
    const auto a = root / entry.path().stem() / "a";
    const auto b = root / entry.path().stem() / "b";
    run_seed(c, 7, a, true);
    run_seed(c, 7, b, true);
    for (const auto& f : fs::directory_iterator(a)) {
      ++files;
      if (slurp(f.path()) != slurp(b / f.path().filename())) {
        pass = false;
        detail += fmt::format("{} differs in {}; ", entry.path().filename().string(),
                              f.path().filename().string());
      }
    }
  }
  fs::remove_all(root);
  detail += fmt::format("{} report/trace files compared byte for byte", files);
  return {pass && files > 0, detail};
}

// --- 9 ---------------------------------------------------------------------

Verdict
processing_charges()
{
  const auto c = load_config(kConfigs / "smoke.yaml");
  std::ostringstream trace;
  run(c, std::nullopt, nullptr, &trace);
  std::size_t rfib = 0;
  std::size_t fib = 0;
  std::size_t bad = 0;
  std::istringstream in(trace.str());
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    const auto& d = j["detail"];
    if (!d.contains("delay_us")) {
      continue;
    }
    const long us = d["delay_us"];
    if (d.contains("path") && d["path"] == "rfib") {
      ++rfib;
      bad += us < 74 || us > 106;
    }
    else {
      ++fib;
      bad += us < 71 || us > 101;
    }
  }

  // Informational: real cost of the lookups on this machine.
  const auto entries = assign_buckets(Name("/detect"),
                                      {Name("/e/0"), Name("/e/1"), Name("/e/2"), Name("/e/3")},
                                      HashFamilyConfig::make(5, 16, 128, 1));
  Rfib rf;
  rf.install(Name("/detect"), entries);
  Fib fb;
  for (int i = 0; i < 50; ++i) {
    fb.insert(Name(fmt::format("/p/{}", i)), {1});
  }
  fb.insert(Name("/detect"), {2});
  std::mt19937_64 rng(1);
  std::vector<TaskName> names;
  for (int i = 0; i < 1000; ++i) {
    ConcatenatedHash h;
    h.index_size_bytes = 2;
    for (int t = 0; t < 5; ++t) {
      h.per_table.push_back(rng() % 65536);
    }
    names.push_back(build_task_name(Name("/detect"), h, true));
  }
  constexpr int kRounds = 100;
  std::size_t sink = 0;
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < kRounds; ++r) {
    for (const auto& n : names) {
      sink += rfib_select(rf, n).matched_tables;
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  for (int r = 0; r < kRounds; ++r) {
    for (const auto& n : names) {
      sink += fb.longest_prefix_match(n.to_name())->faces.size();
    }
  }
  auto t2 = std::chrono::steady_clock::now();
  const double ops = kRounds * names.size();
  const double rfib_ns = std::chrono::duration<double, std::nano>(t1 - t0).count() / ops;
  const double fib_ns = std::chrono::duration<double, std::nano>(t2 - t1).count() / ops;

  return {bad == 0 && rfib > 0 && fib > 0,
          fmt::format("{} rFIB hops in [74, 106] us, {} FIB hops in [71, 101] us, {} outside; "
                      "wall clock (info): rfib_select {:.0f} ns, FIB match {:.0f} ns{}",
                      rfib, fib, bad, rfib_ns, fib_ns, sink == 0 ? " (no work)" : "")};
}

} // namespace

int
main()
{
  criterion(1, "golden rFIB selection", golden_rfib);
  criterion(2, "completion-time ratios", completion_ratios_check);
  criterion(3, "reuse monotonic in threshold", reuse_monotonicity);
  criterion(4, "high-correlation reuse volume", reuse_volume);
  criterion(5, "LSH recall vs brute force", lsh_recall_check);
  criterion(6, "forwarding error rate", forwarding_error_check);
  criterion(7, "pipeline properties", pipeline_properties);
  criterion(8, "determinism", determinism);
  criterion(9, "forwarder processing charges", processing_charges);
  fmt::print("{} of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
