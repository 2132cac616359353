#pragma once

#include <string>
#include <vector>

#include "chunkrl/placement/plan.hpp"
#include "chunkrl/placement/rollout.hpp"
#include "chunkrl/placement/trace.hpp"

namespace chunkrl::placement {

/// One entry of a worker's message log, used to check that activity
/// ordering respects the rollout dependency DAG.
struct MessageLogEntry {
  std::string event; // "send_obs", "recv_obs", "send_act", "recv_act"
  int stage = 0;
  int t = 0; // chunk index; -1 for the initial observation
};

struct RealRunResult {
  TrajectorySlab slab;
  EpochTrace trace; // wall-clock seconds relative to epoch start
  std::vector<MessageLogEntry> sim_log;
  std::vector<MessageLogEntry> gen_log;
};

/// Concurrent rollout backend: one simulator worker owning the k stage
/// partitions and one generation worker owning the policy snapshot and the
/// per-env sampling streams. The two communicate exclusively through FIFO
/// message channels, so the produced slab is identical to the virtual
/// backend's for the same spec.
class RealBackend {
public:
  explicit RealBackend(const PlacementPlan& plan) : plan_(plan) { validate_plan(plan); }

  RealRunResult run_rollout_epoch(const RolloutSpec& spec,
                                  const policy::PolicyNet& snapshot);

private:
  PlacementPlan plan_;
};

} // namespace chunkrl::placement
