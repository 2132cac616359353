#include "chunkrl/harness/bench.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "chunkrl/harness/metrics.hpp"
#include "chunkrl/placement/virtual_clock.hpp"

namespace chunkrl::harness {

using placement::CostModel;
using placement::PlacementMode;
using placement::PlacementPlan;
using placement::RolloutSpec;
using placement::SlotRange;

std::vector<PlacementPlan> standard_plan_set(int num_slots) {
  int q = std::max(1, num_slots / 4);
  int h = std::max(1, num_slots / 2);
  PlacementPlan disagg;
  disagg.num_slots = num_slots;
  disagg.env_slots = SlotRange{0, q - 1};
  disagg.rollout_slots = SlotRange{q, 2 * q - 1};
  disagg.actor_slots = SlotRange{2 * q, num_slots - 1};

  PlacementPlan colocated;
  colocated.num_slots = num_slots;
  colocated.env_slots = colocated.rollout_slots = colocated.actor_slots =
      SlotRange{0, num_slots - 1};
  colocated.env_offload = colocated.rollout_offload = colocated.actor_offload = true;

  PlacementPlan hybrid1;
  hybrid1.num_slots = num_slots;
  hybrid1.env_slots = SlotRange{0, h - 1};
  hybrid1.rollout_slots = SlotRange{h, num_slots - 1};
  hybrid1.actor_slots = SlotRange{0, num_slots - 1};
  hybrid1.env_offload = hybrid1.rollout_offload = hybrid1.actor_offload = true;

  PlacementPlan hybrid2 = hybrid1;
  hybrid2.pipeline_stage_num = 2;

  return {disagg, colocated, hybrid1, hybrid2};
}

std::string plan_label(const PlacementPlan& plan) {
  PlacementMode mode = derive_mode(plan);
  if (mode == PlacementMode::Hybrid)
    return "hybrid-k" + std::to_string(plan.pipeline_stage_num);
  return placement_mode_name(mode);
}

std::vector<BenchRow> cmd_bench(const RunConfig& config) {
  envsim::VecEnv probe(config.env, 0, 1);
  policy::PolicyDescriptor desc;
  desc.obs_dim = probe.observation_dim();
  desc.hidden = config.policy.hidden;
  desc.trunk_layers = config.policy.trunk_layers;
  desc.value_hidden = config.policy.value_hidden;
  desc.vocab = probe.vocab_size();
  desc.C = config.env.chunk_length;
  desc.M = probe.tokens_per_action();
  policy::PolicyNet net = policy::PolicyNet::initialized(desc, mix_seed(config.seed, 1));

  RolloutSpec spec;
  spec.env_config = config.env;
  spec.num_chunks = config.algorithm.rollout_chunks;
  spec.reset_mode = config.env.auto_reset ? envsim::ResetMode::Immediate
                                          : envsim::ResetMode::Deferred;
  spec.sample_seed = mix_seed(config.seed, 7);

  std::vector<BenchRow> rows;
  for (const std::string& preset : config.bench.presets) {
    CostModel cost = CostModel::preset(preset);
    for (const PlacementPlan& plan : standard_plan_set(config.plan.num_slots)) {
      if (!config.bench.plans.empty()) {
        const auto& wanted = config.bench.plans;
        if (std::find(wanted.begin(), wanted.end(), plan_label(plan)) == wanted.end())
          continue;
      }
      placement::VirtualClockBackend backend(plan, cost);
      placement::RunResult run = backend.run_epoch(spec, net);
      BenchRow row;
      row.preset = preset;
      row.label = plan_label(plan);
      row.mode = derive_mode(plan);
      row.pipeline_stages = plan.pipeline_stage_num;
      row.rollout_time = run.trace.rollout_end;
      row.train_time = run.trace.epoch_end - run.trace.rollout_end;
      row.total_time = run.trace.epoch_end;
      row.throughput = placement::throughput(run.trace);
      rows.push_back(row);
    }
  }

  if (!config.run_dir.empty()) {
    std::vector<std::pair<std::string, double>> bars;
    for (const BenchRow& row : rows)
      bars.emplace_back(row.preset + "/" + row.label, row.throughput);
    write_file(config.run_dir + "/throughput.svg", svg_bar_chart("throughput", bars));
    write_file(config.run_dir + "/bench.txt", bench_table(rows));
    write_file(config.run_dir + "/manifest.json", manifest_json(config, "bench"));
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "preset" << std::setw(16) << "plan" << std::setw(12)
      << "rollout" << std::setw(12) << "train" << std::setw(12) << "total" << std::setw(12)
      << "throughput" << "\n";
  for (const BenchRow& r : rows) {
    out << std::left << std::setw(8) << r.preset << std::setw(16) << r.label << std::fixed
        << std::setprecision(3) << std::setw(12) << r.rollout_time << std::setw(12)
        << r.train_time << std::setw(12) << r.total_time << std::setw(12) << r.throughput
        << "\n";
  }
  return out.str();
}

placement::EpochTrace cmd_simulate_placement(const RunConfig& config) {
  envsim::VecEnv probe(config.env, 0, 1);
  policy::PolicyDescriptor desc;
  desc.obs_dim = probe.observation_dim();
  desc.hidden = config.policy.hidden;
  desc.trunk_layers = config.policy.trunk_layers;
  desc.value_hidden = config.policy.value_hidden;
  desc.vocab = probe.vocab_size();
  desc.C = config.env.chunk_length;
  desc.M = probe.tokens_per_action();
  policy::PolicyNet net = policy::PolicyNet::initialized(desc, mix_seed(config.seed, 1));

  RolloutSpec spec;
  spec.env_config = config.env;
  spec.num_chunks = config.algorithm.rollout_chunks;
  spec.reset_mode = config.env.auto_reset ? envsim::ResetMode::Immediate
                                          : envsim::ResetMode::Deferred;
  spec.sample_seed = mix_seed(config.seed, 7);

  placement::VirtualClockBackend backend(config.plan,
                                         CostModel::preset(config.cost_preset));
  placement::RunResult run = backend.run_epoch(spec, net);
  if (!config.run_dir.empty()) {
    write_file(config.run_dir + "/trace.jsonl", placement::export_trace(run.trace));
    write_file(config.run_dir + "/manifest.json",
               manifest_json(config, "simulate-placement"));
  }
  return run.trace;
}

} // namespace chunkrl::harness
