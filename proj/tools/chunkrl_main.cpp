#include <CLI11.hpp>

#include <iostream>

#include "chunkrl/core/errors.hpp"
#include "chunkrl/harness/bench.hpp"
#include "chunkrl/harness/metrics.hpp"
#include "chunkrl/harness/oracle.hpp"
#include "chunkrl/harness/train.hpp"
#include "chunkrl/placement/trace.hpp"

namespace {

// Exit codes: 0 ok, 1 assertion failure, 2 config error.
constexpr int kOk = 0;
constexpr int kAssertFail = 1;
constexpr int kConfigError = 2;

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"chunkrl: RL engine for chunked token policies with a "
               "three-mode placement scheduler"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string oracle_suite = "all";
  bool negative_control = false;

  CLI::App* train = app.add_subcommand("train", "run the training loop");
  train->add_option("--config", config_path, "YAML config file")->required();
  train->add_option("--set", overrides, "dotted.key=value overrides");

  CLI::App* bench = app.add_subcommand("bench", "throughput sweep over placement plans");
  bench->add_option("--config", config_path, "YAML config file")->required();
  bench->add_option("--set", overrides, "dotted.key=value overrides");

  CLI::App* simulate =
      app.add_subcommand("simulate-placement", "virtual-clock trace for one plan");
  simulate->add_option("--config", config_path, "YAML config file")->required();
  simulate->add_option("--set", overrides, "dotted.key=value overrides");

  CLI::App* oracle = app.add_subcommand("oracle", "run the independent oracle suites");
  oracle->add_option("--suite", oracle_suite, "gae|gradients|makespan|sampling|all");
  oracle->add_flag("--negative-control", negative_control,
                   "tamper with tolerances; the suite must fail");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      chunkrl::harness::RunConfig config =
          chunkrl::harness::load_config(config_path, overrides);
      chunkrl::harness::TrainResult result = chunkrl::harness::cmd_train(
          config, [](const chunkrl::harness::EpochMetrics& m) {
            std::cout << chunkrl::harness::metrics_line(m) << "\n";
          });
      std::cout << "final success_rate " << result.final_success_rate() << "\n";
      return kOk;
    }
    if (bench->parsed()) {
      chunkrl::harness::RunConfig config =
          chunkrl::harness::load_config(config_path, overrides);
      std::vector<chunkrl::harness::BenchRow> rows = chunkrl::harness::cmd_bench(config);
      std::cout << chunkrl::harness::bench_table(rows);
      return kOk;
    }
    if (simulate->parsed()) {
      chunkrl::harness::RunConfig config =
          chunkrl::harness::load_config(config_path, overrides);
      chunkrl::placement::EpochTrace trace =
          chunkrl::harness::cmd_simulate_placement(config);
      std::cout << chunkrl::placement::export_trace(trace);
      std::cout << "throughput " << chunkrl::placement::throughput(trace) << "\n";
      return kOk;
    }
    if (oracle->parsed()) {
      chunkrl::harness::OracleReport report =
          chunkrl::harness::cmd_oracle(oracle_suite, negative_control);
      for (const std::string& line : report.lines)
        std::cout << line << "\n";
      std::cout << report.checks - report.failures << "/" << report.checks
                << " oracle checks passed\n";
      return report.passed() ? kOk : kAssertFail;
    }
  } catch (const chunkrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const chunkrl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAssertFail;
  }
  return kConfigError;
}
