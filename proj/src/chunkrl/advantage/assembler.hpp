#pragma once

#include <optional>
#include <vector>

#include "chunkrl/advantage/gae.hpp"
#include "chunkrl/advantage/grpo.hpp"
#include "chunkrl/core/granularity.hpp"
#include "chunkrl/core/types.hpp"
#include "chunkrl/policy/policy_net.hpp"

namespace chunkrl::advantage {

/// One chunk record prepared for the PPO loss. Views point into the slab,
/// which must outlive the batch.
struct PpoRecordView {
  const StepRecord* rec = nullptr;
  int env = 0;
  int chunk_index = 0;
  /// Slots participating in the loss. At chunk level only the slots of the
  /// chunk's leading episode count (post-reset tail slots of a partial
  /// reset are dropped); at action level every valid slot counts.
  std::vector<bool> counted; // size C
  /// Advantage per advantage-level unit: size 1 at chunk level, C at action
  /// level (entries meaningful only where counted).
  std::vector<double> advantages;
  /// Value targets at the same granularity (returns from GAE).
  std::vector<double> returns;
};

struct PpoBatch {
  GranularitySpec spec;
  int C = 0, M = 0;
  std::vector<PpoRecordView> records;

  std::int64_t advantage_unit_count() const;
};

/// One trajectory's slice of a chunk record for GRPO.
struct TrajChunk {
  const StepRecord* rec = nullptr;
  std::vector<int> slots;           // slot indices belonging to the episode
  std::vector<double> slot_weights; // aligned with slots
};

struct GrpoTrajectory {
  std::int64_t episode_uid = -1;
  int env = 0;
  double advantage = 0.0; // group-relative scalar, broadcast downstream
  std::vector<TrajChunk> chunks;
};

struct GrpoGroup {
  GroupKey key;
  std::vector<GrpoTrajectory> trajectories;
};

struct GrpoBatch {
  GranularitySpec spec;
  int C = 0, M = 0;
  std::vector<GrpoGroup> groups;
};

struct PpoAssemblyOptions {
  GaeParams gae;
  GranularitySpec spec;
};

/// Builds the PPO batch: per-episode segments are cut from each env's
/// timeline, GAE runs at the advantage level with bootstrap values from the
/// snapshot policy (zero past terminations, V(terminal obs) past
/// truncations, V(current obs) at the rollout cut).
PpoBatch assemble_ppo_batch(const TrajectorySlab& slab, const policy::PolicyNet& snapshot,
                            const PpoAssemblyOptions& options);

struct GrpoAssemblyOptions {
  GranularitySpec spec;
  double eps_std = 1e-8;
  bool apply_filter = true;
  FilterBounds filter_bounds;
  bool length_normalized = true;
  int min_group_size = 2;
};

struct GrpoAssemblyResult {
  GrpoBatch batch;
  int groups_total = 0;
  int groups_retained = 0;
};

/// Builds GRPO groups from complete episodes that started at rollout begin
/// (group membership requires the clean shared initial state), applies the
/// success-rate filter and computes group advantages and per-step weights.
/// An empty `batch.groups` means the caller should skip the update.
GrpoAssemblyResult assemble_grpo_batch(const TrajectorySlab& slab,
                                       const GrpoAssemblyOptions& options);

/// Fraction of complete episodes with the success flag set (success_once).
double slab_success_rate(const TrajectorySlab& slab);

} // namespace chunkrl::advantage
