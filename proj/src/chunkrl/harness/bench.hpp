#pragma once

#include <string>
#include <vector>

#include "chunkrl/harness/config.hpp"
#include "chunkrl/placement/trace.hpp"

namespace chunkrl::harness {

struct BenchRow {
  std::string preset;
  std::string label; // "disaggregated", "colocated", "hybrid-k1", "hybrid-k2"
  placement::PlacementMode mode = placement::PlacementMode::Colocated;
  int pipeline_stages = 1;
  double rollout_time = 0.0;
  double train_time = 0.0;
  double total_time = 0.0;
  double throughput = 0.0;
};

/// The standard plan sweep for a cluster of num_slots (quarters for the
/// disaggregated split, halves for hybrid, everything for colocated).
std::vector<placement::PlacementPlan> standard_plan_set(int num_slots);
std::string plan_label(const placement::PlacementPlan& plan);

/// Runs one virtual-clock epoch per (preset x plan) and reports the
/// rollout/training latency breakdown plus throughput.
std::vector<BenchRow> cmd_bench(const RunConfig& config);

std::string bench_table(const std::vector<BenchRow>& rows);

/// Runs the single configured plan/preset, writes the trace event log and
/// returns the trace.
placement::EpochTrace cmd_simulate_placement(const RunConfig& config);

} // namespace chunkrl::harness
