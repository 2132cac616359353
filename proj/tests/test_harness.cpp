#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "chunkrl/core/errors.hpp"
#include "chunkrl/harness/bench.hpp"
#include "chunkrl/harness/config.hpp"
#include "chunkrl/harness/metrics.hpp"
#include "chunkrl/harness/oracle.hpp"
#include "chunkrl/harness/train.hpp"

using namespace chunkrl;
using namespace chunkrl::harness;

namespace {

const char* kPpoYaml = R"(
seed: 5
epochs: 2
env:
  kind: toy_reach
  num_envs: 8
  max_episode_steps: 20
  auto_reset: true
  ignore_terminations: false
  chunk_length: 4
  grid_size: 4
algorithm:
  name: ppo
  reward_type: action_level
  logprob_type: token_level
  gamma: 0.95
  lambda: 0.9
  rollout_chunks: 5
  epochs_per_batch: 2
  minibatch_size: 16
policy:
  hidden: 16
  trunk_layers: 1
  value_hidden: 8
cluster:
  num_slots: 8
  component_placement:
    env: "0-3"
    rollout: "4-7"
    actor: "0-7"
rollout:
  pipeline_stage_num: 2
  enable_offload: true
actor:
  enable_offload: true
)";

const char* kGrpoYaml = R"(
seed: 6
epochs: 2
env:
  kind: toy_reach
  num_envs: 8
  max_episode_steps: 16
  auto_reset: false
  ignore_terminations: false
  use_fixed_reset_state_ids: true
  chunk_length: 4
  grid_size: 4
algorithm:
  name: grpo
  reward_type: chunk_level
  logprob_type: token_level
  group_size: 4
  num_groups: 2
  length_normalization: true
)";

} // namespace

TEST_CASE("config round-trip: load, serialize, load is identity") {
  RunConfig a = parse_config(kPpoYaml);
  RunConfig b = parse_config(serialize_config(a));
  CHECK(a == b);
  CHECK(config_hash(a) == config_hash(b));

  RunConfig g = parse_config(kGrpoYaml);
  CHECK(parse_config(serialize_config(g)) == g);
}

TEST_CASE("value_type defaults to reward_type") {
  RunConfig c = parse_config(kPpoYaml);
  CHECK(c.algorithm.granularity.value_level == Level::Action);
}

TEST_CASE("config validation rejects bad inputs with key paths") {
  CHECK_THROWS_AS(parse_config("nonsense_key: 1\n"), ConfigError);
  // the rejected granularity cell
  CHECK_THROWS_AS(
      parse_config(apply_overrides(kPpoYaml, {"algorithm.reward_type=action_level",
                                              "algorithm.logprob_type=chunk_level"})),
      ConfigError);
  // GRPO needs fixed reset ids
  CHECK_THROWS_AS(
      parse_config(apply_overrides(kGrpoYaml, {"env.use_fixed_reset_state_ids=false"})),
      ConfigError);
  // GRPO group arithmetic
  CHECK_THROWS_AS(parse_config(apply_overrides(kGrpoYaml, {"algorithm.num_groups=3"})),
                  ConfigError);
  // PPO rollout-mode pairing: auto_reset=false without ignore_terminations
  CHECK_THROWS_AS(parse_config(apply_overrides(kPpoYaml, {"env.auto_reset=false"})),
                  ConfigError);
  // value_type must match reward_type
  CHECK_THROWS_AS(
      parse_config(apply_overrides(kPpoYaml, {"algorithm.value_type=chunk_level"})),
      ConfigError);
  // k must divide the env batch
  CHECK_THROWS_AS(
      parse_config(apply_overrides(kPpoYaml, {"rollout.pipeline_stage_num=3"})),
      ConfigError);
}

TEST_CASE("overrides navigate dotted paths") {
  std::string text = apply_overrides(kPpoYaml, {"algorithm.gamma=0.5", "seed=9"});
  RunConfig c = parse_config(text);
  CHECK(c.algorithm.gae.gamma == 0.5);
  CHECK(c.seed == 9);
}

TEST_CASE("seeded training runs are reproducible end-to-end") {
  RunConfig c = parse_config(kPpoYaml);
  TrainResult a = cmd_train(c);
  TrainResult b = cmd_train(c);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].loss == b.history[i].loss);
    CHECK(a.history[i].success_rate == b.history[i].success_rate);
  }
}

TEST_CASE("real-backend training matches the virtual backend bit-exactly") {
  RunConfig c = parse_config(kPpoYaml);
  TrainResult a = cmd_train(c);
  c.backend = Backend::Real;
  TrainResult b = cmd_train(c);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i)
    CHECK(a.history[i].loss == b.history[i].loss);
}

TEST_CASE("train writes metrics, manifest, plots, dump and checkpoint") {
  RunConfig c = parse_config(kPpoYaml);
  auto dir = std::filesystem::temp_directory_path() / "chunkrl_run_test";
  std::filesystem::remove_all(dir);
  c.run_dir = dir.string();
  cmd_train(c);
  for (const char* name : {"metrics.jsonl", "manifest.json", "success_rate.svg",
                           "trajectories.txt", "checkpoint.bin"})
    CHECK(std::filesystem::exists(dir / name));
  // metrics has one line per epoch
  std::ifstream metrics(dir / "metrics.jsonl");
  int lines = 0;
  std::string line;
  while (std::getline(metrics, line))
    ++lines;
  CHECK(lines == c.epochs);
  std::filesystem::remove_all(dir);
}

TEST_CASE("GRPO epochs with nothing retained are logged as skipped") {
  RunConfig c = parse_config(kGrpoYaml);
  // Impossible bounds: every group is discarded, every epoch skips.
  c.algorithm.filter_bounds = {1e8, 1e9};
  TrainResult r = cmd_train(c);
  for (const EpochMetrics& m : r.history) {
    CHECK(m.skipped);
    CHECK(m.groups_retained == 0);
  }
}

TEST_CASE("bench produces one row per preset and plan") {
  RunConfig c = parse_config(kPpoYaml);
  c.bench.presets = {"1to1"};
  std::vector<BenchRow> rows = cmd_bench(c);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].label == "disaggregated");
  CHECK(rows[1].label == "colocated");
  CHECK(rows[2].label == "hybrid-k1");
  CHECK(rows[3].label == "hybrid-k2");
  for (const BenchRow& row : rows)
    CHECK(row.throughput > 0.0);
  std::string table = bench_table(rows);
  CHECK(table.find("hybrid-k2") != std::string::npos);

  // single plan -> single row
  c.bench.plans = {"colocated"};
  std::vector<BenchRow> one = cmd_bench(c);
  REQUIRE(one.size() == 1);
  CHECK(one[0].label == "colocated");
}

TEST_CASE("simulate-placement exports a validated trace") {
  RunConfig c = parse_config(kPpoYaml);
  placement::EpochTrace trace = cmd_simulate_placement(c);
  CHECK_NOTHROW(placement::validate_trace(trace));
  CHECK(placement::throughput(trace) > 0.0);
}

TEST_CASE("oracle suites pass and the negative control fails") {
  OracleReport gae = cmd_oracle("gae");
  CHECK(gae.passed());
  OracleReport makespan = cmd_oracle("makespan");
  CHECK(makespan.passed());
  OracleReport sampling = cmd_oracle("sampling");
  CHECK(sampling.passed());

  OracleReport tampered = cmd_oracle("gae", /*tamper=*/true);
  CHECK_FALSE(tampered.passed());
  OracleReport tampered_makespan = cmd_oracle("makespan", /*tamper=*/true);
  CHECK_FALSE(tampered_makespan.passed());

  CHECK_THROWS_AS(cmd_oracle("bogus"), ConfigError);
}

TEST_CASE("manifest carries hash, seed and version") {
  RunConfig c = parse_config(kPpoYaml);
  std::string manifest = manifest_json(c, "train");
  CHECK(manifest.find("config_hash") != std::string::npos);
  CHECK(manifest.find("\"seed\": 5") != std::string::npos);
  CHECK(manifest.find(kCodeVersion) != std::string::npos);
}
