#include "reservoir/experiment.hpp"

#include "reservoir/control.hpp"
#include "reservoir/sim.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace reservoir {

namespace fs = std::filesystem;

namespace {

std::uint64_t
parse_u64(const std::string& s)
{
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &pos);
  }
  catch (const std::exception&) {
    throw ConfigError("bad seed '" + s + "'");
  }
  if (pos != s.size()) {
    throw ConfigError("bad seed '" + s + "'");
  }
  return v;
}

std::ofstream
open_out(const fs::path& p)
{
  std::ofstream out(p, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write " + p.string());
  }
  return out;
}

} // namespace

std::vector<std::uint64_t>
parse_seed_list(const std::string& text)
{
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    const std::string part =
      text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (part.empty()) {
      throw ConfigError("empty entry in seed list '" + text + "'");
    }
    if (auto dots = part.find(".."); dots != std::string::npos) {
      const auto lo = parse_u64(part.substr(0, dots));
      const auto hi = parse_u64(part.substr(dots + 2));
      if (lo > hi) {
        throw ConfigError("descending seed range '" + part + "'");
      }
      for (auto s = lo; s <= hi; ++s) {
        seeds.push_back(s);
      }
    }
    else {
      seeds.push_back(parse_u64(part));
    }
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return seeds;
}

SeedResult
run_seed(const SimConfig& base, std::uint64_t seed, const fs::path& dir, bool trace)
{
  SimConfig config = base;
  config.seed = seed;
  fs::create_directories(dir);
  Simulation sim(config);
  std::ofstream trace_out;
  if (trace || config.trace) {
    trace_out = open_out(dir / "trace.jsonl");
    sim.set_trace(&trace_out);
  }
  sim.run();

  SeedResult result;
  result.seed = seed;
  result.report = compute_report(sim.log(), sim.workload());
  const auto& r = result.report;
  {
    auto out = open_out(dir / "completion_times.csv");
    write_completion_csv(out, r);
  }
  {
    auto out = open_out(dir / "reuse_breakdown.csv");
    write_breakdown_csv(out, r);
  }
  {
    auto out = open_out(dir / "accuracy.csv");
    write_accuracy_csv(out, r);
  }
  {
    auto out = open_out(dir / "forwarding_error.csv");
    write_forwarding_error_csv(out, r);
  }
  {
    auto out = open_out(dir / "en_load.csv");
    write_en_load_csv(out, r);
  }
  {
    auto out = open_out(dir / "lsh_recall.csv");
    write_recall_csv(out, r);
  }
  {
    auto out = open_out(dir / "sessions.csv");
    write_sessions_csv(out, sim.log().sessions);
  }
  {
    auto out = open_out(dir / "assignments.csv");
    out << "epoch_time_us,service,en,table,lo,hi\n";
    for (const auto& epoch : sim.epochs()) {
      std::ostringstream rows;
      write_assignments_csv(rows, epoch.rfib, false);
      std::istringstream in(rows.str());
      for (std::string line; std::getline(in, line);) {
        out << epoch.time.count() << ',' << line << '\n';
      }
    }
  }
  {
    auto out = open_out(dir / "summary.txt");
    fmt::print(out, "seed                {}\n", seed);
    write_summary(out, r);
  }
  return result;
}

std::vector<SeedResult>
run_experiment(const SimConfig& config, const fs::path& out_dir, const RunOptions& options)
{
  if (options.seeds.empty()) {
    throw ConfigError("no seeds to run");
  }
  fs::create_directories(out_dir);
  std::vector<SeedResult> results(options.seeds.size());
  std::vector<std::exception_ptr> errors(options.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < options.seeds.size(); i = next++) {
      try {
        const auto seed = options.seeds[i];
        results[i] = run_seed(config, seed, out_dir / fmt::format("seed_{}", seed), options.trace);
      }
      catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, options.seeds.size()));
  if (jobs == 1) {
    worker();
  }
  else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  auto out = open_out(out_dir / "aggregate.csv");
  write_aggregate_csv(out, aggregate(results));
  return results;
}

std::vector<AggregateRow>
aggregate(const std::vector<SeedResult>& results)
{
  std::vector<std::pair<std::string, std::vector<double>>> series;
  auto add = [&](const std::string& name, std::optional<double> v) {
    auto it = std::find_if(series.begin(), series.end(), [&](const auto& s) { return s.first == name; });
    if (it == series.end()) {
      series.emplace_back(name, std::vector<double>{});
      it = series.end() - 1;
    }
    if (v) {
      it->second.push_back(*v);
    }
  };
  for (const auto& res : results) {
    const auto& r = res.report;
    add("finished", static_cast<double>(r.finished));
    add("failed", static_cast<double>(r.failed));
    add("percent_reuse", r.percent_reuse);
    add("accuracy", r.accuracy.accuracy());
    add("forwarding_error_rate", r.forwarding.rate());
    add("similar_elsewhere_rate", r.forwarding.similar_elsewhere_rate());
    add("lsh_recall", r.recall.recall());
    add("scratch_over_cs", r.ratios.scratch_over_cs);
    add("scratch_over_en", r.ratios.scratch_over_en);
    for (const auto& [src, pct] : r.breakdown_pct) {
      add(fmt::format("pct_{}", to_string(src)), pct);
    }
    for (const auto& [src, s] : r.completion) {
      add(fmt::format("mean_ms_{}", to_string(src)),
          s.count > 0 ? std::optional<double>(s.mean_ms) : std::nullopt);
    }
  }
  std::vector<AggregateRow> rows;
  for (const auto& [name, xs] : series) {
    AggregateRow row;
    row.metric = name;
    row.n = xs.size();
    if (!xs.empty()) {
      double sum = 0.0;
      for (double x : xs) {
        sum += x;
      }
      row.mean = sum / static_cast<double>(xs.size());
      double ss = 0.0;
      for (double x : xs) {
        ss += (x - row.mean) * (x - row.mean);
      }
      row.stddev = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void
write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows)
{
  out << "metric,n,mean,stddev\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{:.6f},{:.6f}\n", r.metric, r.n, r.mean, r.stddev);
  }
}

std::vector<std::vector<AggregateRow>>
sweep(const SimConfig& config, const std::string& key, const std::vector<std::string>& values,
      const fs::path& out_dir, const RunOptions& options)
{
  if (values.empty()) {
    throw ConfigError("sweep needs at least one value");
  }
  std::vector<SimConfig> configs;
  for (const auto& v : values) {
    SimConfig c = config;
    set_parameter(c, key, v);
    if (auto diags = validate_config(c); !diags.empty()) {
      throw ConfigDiagnostics(std::move(diags), key + "=" + v);
    }
    configs.push_back(std::move(c));
  }

  fs::create_directories(out_dir);
  std::vector<std::vector<AggregateRow>> all;
  std::vector<std::string> metric_names;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto results = run_experiment(configs[i], out_dir / fmt::format("{}={}", key, values[i]), options);
    all.push_back(aggregate(results));
    for (const auto& row : all.back()) {
      if (std::find(metric_names.begin(), metric_names.end(), row.metric) == metric_names.end()) {
        metric_names.push_back(row.metric);
      }
    }
  }

  auto out = open_out(out_dir / "sweep.csv");
  out << key;
  for (const auto& m : metric_names) {
    out << ',' << m << "_mean," << m << "_stddev";
  }
  out << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << values[i];
    for (const auto& m : metric_names) {
      auto it = std::find_if(all[i].begin(), all[i].end(), [&](const auto& r) { return r.metric == m; });
      if (it == all[i].end() || it->n == 0) {
        out << ",,";
      }
      else {
        fmt::print(out, ",{:.6f},{:.6f}", it->mean, it->stddev);
      }
    }
    out << '\n';
  }
  return all;
}

} // namespace reservoir
