#pragma once

#include <vector>

#include "chunkrl/core/types.hpp"

namespace chunkrl::advantage {

/// G trajectories sharing one (task, reset state) key.
struct GroupBatch {
  GroupKey key;
  std::vector<double> total_rewards;          // R^(i), undiscounted episode sums
  std::vector<std::int64_t> lengths;          // |tau^(i)| in atomic steps
  std::vector<std::int64_t> first_success;    // in-episode index, -1 if none
  std::vector<std::int64_t> episode_uids;
  std::vector<int> env_ids;

  std::size_t size() const { return total_rewards.size(); }
};

struct FilterBounds {
  double lower = 0.0;
  double upper = 1.0;

  bool operator==(const FilterBounds&) const = default;
};

/// Group-relative advantages: (R_i - mean) / (pop_std + eps_std), one scalar
/// per trajectory (broadcast across its timesteps downstream). Throws
/// DegenerateGroup when the population std is zero and eps_std is zero,
/// and requires G >= 2.
std::vector<double> grpo_group_advantage(const GroupBatch& batch, double eps_std);

/// Mean of the group's total rewards.
double group_mean_return(const GroupBatch& batch);

/// Keeps groups with lower < mean(R) < upper (strict); with binary returns
/// and bounds (0,1) this drops exactly the all-success and all-fail groups.
std::vector<GroupBatch> success_rate_filter(const std::vector<GroupBatch>& groups,
                                            const FilterBounds& bounds);

/// Per-atomic-step validity for one episode of `length` steps: for a
/// successful episode steps after the first success are invalid (the
/// success step itself stays valid); failures keep every step.
std::vector<bool> valid_action_mask(std::int64_t length, bool success,
                                    std::int64_t first_success_step);

/// Per-step loss weights for one episode. Normalized mode: 1/T_succ on the
/// valid steps, 0 elsewhere; base mode: uniform 1/|tau| on every step. The
/// weights of each trajectory sum to 1 in both modes.
std::vector<double> length_norm_weights(std::int64_t length, bool success,
                                        std::int64_t first_success_step,
                                        bool length_normalized);

/// Slab-level mask: per env, one boolean per atomic step. Frozen chunk_step
/// slots are always masked out; within an episode the per-episode rule
/// above applies.
std::vector<std::vector<bool>> valid_action_mask(const TrajectorySlab& slab);

/// Slab-level weights aligned with valid_action_mask(slab); masked and
/// frozen steps carry weight 0.
std::vector<std::vector<double>> length_norm_weights(const TrajectorySlab& slab,
                                                     bool length_normalized);

} // namespace chunkrl::advantage
