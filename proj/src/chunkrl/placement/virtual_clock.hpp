#pragma once

#include "chunkrl/placement/cost_model.hpp"
#include "chunkrl/placement/plan.hpp"
#include "chunkrl/placement/rollout.hpp"
#include "chunkrl/placement/trace.hpp"

namespace chunkrl::placement {

struct RunResult {
  TrajectorySlab slab;
  EpochTrace trace;
};

/// Deterministic single-threaded discrete-event backend. It executes the
/// real rollout math (so trajectories are exact) while booking virtual-time
/// intervals per slot: stage tasks serialize on their component's slot set,
/// cross-partition handoffs add t_comm latency, and offload/onload events
/// are inserted at phase boundaries when an idle component must vacate
/// oversubscribed slots.
class VirtualClockBackend {
public:
  VirtualClockBackend(const PlacementPlan& plan, const CostModel& cost);

  /// Rollout phase: onload events, k pipelined stages of reset/generate/
  /// step tasks. Throws MemoryOverflow when residency cannot fit and
  /// offload is disabled.
  RunResult run_rollout_epoch(const RolloutSpec& spec, const policy::PolicyNet& snapshot);

  /// Training phase appended to a rollout trace: offload/onload events and
  /// one training task sized from trace.frames over the actor slots.
  void run_training_phase(EpochTrace& trace, int num_envs) const;

  /// Convenience: rollout followed by training.
  RunResult run_epoch(const RolloutSpec& spec, const policy::PolicyNet& snapshot);

  const PlacementPlan& plan() const { return plan_; }

private:
  struct OffloadDecision {
    bool actor_for_rollout = false; // actor vacates during rollout
    bool env_for_training = false;  // simulator vacates during training
    bool gen_for_training = false;  // generation vacates during training
  };
  OffloadDecision plan_offloads(int num_envs) const;

  PlacementPlan plan_;
  CostModel cost_;
  PlacementMode mode_;
};

} // namespace chunkrl::placement
