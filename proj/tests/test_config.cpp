#include "doctest.h"

#include "reservoir/config.hpp"
#include "reservoir/experiment.hpp"

#include <filesystem>
#include <fstream>

using namespace reservoir;
namespace fs = std::filesystem;

namespace {

std::vector<Diagnostic>
diagnostics_of(const std::string& yaml)
{
  try {
    parse_config(yaml);
  }
  catch (const ConfigDiagnostics& e) {
    return e.diagnostics();
  }
  return {};
}

bool
mentions(const std::vector<Diagnostic>& ds, const std::string& path)
{
  for (const auto& d : ds) {
    if (d.path.rfind(path, 0) == 0) {
      return true;
    }
  }
  return false;
}

const char* kTwoEns = R"(
hash: {num_tables: 2, bits_per_table: 8, dimension: 8}
topology:
  kind: explicit
  nodes:
    - {id: d, device: /dev/d}
    - {id: a, en: /en/a}
    - {id: b, en: /en/b}
  links:
    - {a: d, b: a, delay_ms: 2}
    - {a: a, b: b, delay_ms: 5}
services: [/s]
workload: {count: 10}
rfib:
  - service: /s
    entries:
      - {en: /en/a, ranges: [[0, 127], [0, 127]]}
      - {en: /en/b, ranges: [[RANGE_LO, 255], [128, 255]]}
)";

std::string
two_ens(const std::string& lo)
{
  std::string s = kTwoEns;
  s.replace(s.find("RANGE_LO"), 8, lo);
  return s;
}

} // namespace

TEST_CASE("defaults")
{
  auto c = parse_config("services: [/s]\n");
  CHECK(c.hash.num_tables == 5);
  CHECK(c.hash.bits_per_table == 16);
  CHECK(c.hash.index_size_bytes == 2);
  CHECK(c.probe_radius == 1);
  CHECK(c.forwarder.pit_lifetime == std::chrono::seconds{4});
  CHECK(c.forwarder.delays.rfib_min.count() == 74);
  CHECK(c.edge.ewma_alpha == 0.125);
  CHECK(c.offload.mode == OffloadMode::Inline);
  CHECK(validate_config(c).empty());
}

TEST_CASE("explicit rFIB layouts")
{
  auto ok = parse_config(two_ens("128"));
  REQUIRE(ok.explicit_rfib.count(Name("/s")));
  CHECK(ok.explicit_rfib.at(Name("/s"))[1].bucket_ranges[0] == BucketRange{128, 255});
  CHECK(mentions(diagnostics_of(two_ens("127")), "rfib"));
  CHECK(mentions(diagnostics_of(two_ens("129")), "rfib"));
}

TEST_CASE("rejected configs carry paths and lines")
{
  auto ds = diagnostics_of("hash:\n  bits_per_table: 9\n  index_size_bytes: 1\nservices: [/s]\n");
  REQUIRE(mentions(ds, "hash"));
  CHECK(ds[0].line > 0);

  ds = diagnostics_of("services: [/s]\nhash:\n  num_tabels: 3\n");
  REQUIRE(mentions(ds, "hash.num_tabels"));
  CHECK(ds[0].line == 3);

  CHECK(mentions(diagnostics_of("services: []\n"), "services"));
  CHECK(mentions(diagnostics_of("services: [/s]\nhash: {bits_per_table: 40}\n"), "hash"));
  CHECK(mentions(diagnostics_of("services: [/s]\nworkload: {correlation: extreme}\n"),
                 "workload"));
  CHECK(mentions(diagnostics_of("services: [/s]\nworkload: {threshold: 1.5}\n"), "workload"));
  CHECK(mentions(diagnostics_of("services: [/s]\nforwarder: {fib_delay_us: [101, 71]}\n"),
                 "forwarder"));
  CHECK(mentions(diagnostics_of("services: [/s]\noffload: {mode: pull, segment_bytes: 0}\n"), "offload"));
  CHECK(mentions(diagnostics_of("services: [/s]\nloss: {rate: 1.5}\n"), "loss"));
  CHECK(mentions(diagnostics_of("services: [/s]\nedge: {store_capacity: 0}\n"), "edge"));
  CHECK_FALSE(diagnostics_of("services: [/s\n").empty());

  try {
    parse_config("services: [/s]\nhash:\n  num_tabels: 3\n", "x.yaml");
    FAIL("expected diagnostics");
  }
  catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("x.yaml:3") != std::string::npos);
  }
}

TEST_CASE("bundled configs validate")
{
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(RESERVOIR_CONFIG_DIR)) {
    if (entry.path().extension() != ".yaml") {
      continue;
    }
    ++n;
    CAPTURE(entry.path().string());
    SimConfig c;
    CHECK_NOTHROW(c = load_config(entry.path()));
    CHECK(validate_config(c).empty());
  }
  CHECK(n >= 4);
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("sweepable parameters")
{
  auto c = parse_config("services: [/s]\n");
  set_parameter(c, "similarity_threshold", "0.95");
  CHECK(c.workload.threshold == 0.95);
  set_parameter(c, "num_tables", "10");
  CHECK(c.hash.num_tables == 10);
  set_parameter(c, "bits_per_table", "20");
  CHECK(c.hash.index_size_bytes == 3);
  set_parameter(c, "offload_mode", "push");
  CHECK(c.offload.mode == OffloadMode::Push);
  set_parameter(c, "correlation", "low");
  CHECK(c.workload.correlation == Correlation::Low);
  CHECK(validate_config(c).empty());
  CHECK_THROWS_AS(set_parameter(c, "colour", "blue"), ConfigError);
  CHECK_THROWS_AS(set_parameter(c, "num_tables", "many"), ConfigError);
  CHECK(sweepable_keys().size() >= 10);
}

TEST_CASE("seed lists")
{
  CHECK(parse_seed_list("3") == std::vector<std::uint64_t>{3});
  CHECK(parse_seed_list("1,4,9") == std::vector<std::uint64_t>{1, 4, 9});
  CHECK(parse_seed_list("1..50").size() == 50);
  CHECK(parse_seed_list("1..3,7") == std::vector<std::uint64_t>{1, 2, 3, 7});
  CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("5..1"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("1,,2"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("x"), ConfigError);
}

TEST_CASE("experiment output layout")
{
  auto c = load_config(fs::path(RESERVOIR_CONFIG_DIR) / "line.yaml");
  const auto dir = fs::temp_directory_path() / "reservoir_test_runs";
  fs::remove_all(dir);
  RunOptions opts;
  opts.seeds = parse_seed_list("1..3");
  opts.jobs = 2;
  auto results = run_experiment(c, dir, opts);
  CHECK(results.size() == 3);
  for (int s = 1; s <= 3; ++s) {
    const auto seed_dir = dir / ("seed_" + std::to_string(s));
    for (const char* f : {"completion_times.csv", "reuse_breakdown.csv", "accuracy.csv",
                          "forwarding_error.csv", "en_load.csv", "lsh_recall.csv",
                          "sessions.csv", "assignments.csv", "summary.txt"}) {
      CHECK(fs::exists(seed_dir / f));
    }
  }
  CHECK(fs::exists(dir / "aggregate.csv"));

  const auto sweep_dir = dir / "sweep";
  opts.seeds = {1};
  auto rows = sweep(c, "similarity_threshold", {"0.80", "0.90", "0.95", "0.99"}, sweep_dir, opts);
  CHECK(rows.size() == 4);
  std::ifstream in(sweep_dir / "sweep.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) {
    ++lines;
  }
  CHECK(lines == 5);
  CHECK_THROWS_AS(sweep(c, "similarity_threshold", {}, sweep_dir, opts), ConfigError);
  CHECK_THROWS_AS(sweep(c, "nope", {"1"}, sweep_dir, opts), ConfigError);
  fs::remove_all(dir);
}
