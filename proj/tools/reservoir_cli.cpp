#include "reservoir/config.hpp"
#include "reservoir/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

namespace {

reservoir::RunOptions
options_from(const std::string& seeds, bool trace, unsigned jobs)
{
  reservoir::RunOptions o;
  o.seeds = reservoir::parse_seed_list(seeds);
  o.trace = trace;
  o.jobs = jobs;
  return o;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"Edge computation reuse simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "results";
  std::string seeds = "1";
  bool trace = false;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "Run a config over one or more seeds");
  run->add_option("-c,--config", config_path, "YAML config")->required();
  run->add_option("-o,--out", out_dir, "Output directory");
  run->add_option("-s,--seeds", seeds, "Seeds: N, A..B or a comma list");
  run->add_flag("-t,--trace", trace, "Write trace.jsonl per seed");
  run->add_option("-j,--jobs", jobs, "Seeds run in parallel")->check(CLI::PositiveNumber);

  std::string key;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run a config for several values of one key");
  sweep->add_option("-c,--config", config_path, "YAML config")->required();
  sweep->add_option("-o,--out", out_dir, "Output directory");
  sweep->add_option("-s,--seeds", seeds, "Seeds: N, A..B or a comma list");
  sweep->add_option("-k,--key", key, "Sweepable key")->required();
  sweep->add_option("-v,--values", values, "Values to try")->required()->delimiter(',');
  sweep->add_flag("-t,--trace", trace, "Write trace.jsonl per seed");
  sweep->add_option("-j,--jobs", jobs, "Seeds run in parallel")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("-c,--config", config_path, "YAML config")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = reservoir::load_config(config_path);
    if (*validate) {
      std::cout << config_path << ": ok\n";
      return 0;
    }
    if (*run) {
      auto results = reservoir::run_experiment(config, out_dir, options_from(seeds, trace, jobs));
      for (const auto& r : results) {
        std::cout << fmt::format("seed {}: {} sessions, reuse {:.2f}%, scratch {:.2f}%\n", r.seed,
                                 r.report.finished, r.report.percent_reuse,
                                 r.report.breakdown_pct.at(reservoir::CompletionSource::EnScratch));
      }
      std::cout << "wrote " << out_dir << "\n";
      return 0;
    }
    if (*sweep) {
      reservoir::sweep(config, key, values, out_dir, options_from(seeds, trace, jobs));
      std::cout << "wrote " << out_dir << "/sweep.csv\n";
      return 0;
    }
  }
  catch (const reservoir::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
