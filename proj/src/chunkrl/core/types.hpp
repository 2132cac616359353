#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

namespace chunkrl {

/// Fixed-length real feature vector produced by an environment.
using Observation = std::vector<double>;

/// One atomic action: M discrete tokens, each in [0, vocab_size).
struct TokenAction {
  std::vector<int> tokens;

  bool operator==(const TokenAction&) const = default;
};

/// A chunk of C atomic actions emitted by one policy inference.
struct ActionChunk {
  std::vector<TokenAction> actions;

  int chunk_length() const { return static_cast<int>(actions.size()); }
  bool operator==(const ActionChunk&) const = default;
};

/// Row-major C x M matrix of per-token log-probabilities (log-space, <= 0).
struct TokenLogprobs {
  int C = 0;
  int M = 0;
  std::vector<double> values; // size C*M, action-major

  double& at(int action, int token) { return values[static_cast<std::size_t>(action) * M + token]; }
  double at(int action, int token) const { return values[static_cast<std::size_t>(action) * M + token]; }

  bool operator==(const TokenLogprobs&) const = default;
};

/// Identity of a GRPO group: same task, same initial reset state.
struct GroupKey {
  int task_id = 0;
  int reset_state_id = -1;

  bool operator==(const GroupKey&) const = default;
  bool operator<(const GroupKey& o) const {
    return std::tie(task_id, reset_state_id) < std::tie(o.task_id, o.reset_state_id);
  }
};

/// Everything recorded for one chunk interaction of one environment.
/// Per-atomic-slot arrays all have length C. `valid[j]` is false for frozen
/// slots (the sub-env had already finished and the action was not executed).
struct StepRecord {
  Observation obs;          // observation the chunk was sampled from
  ActionChunk chunk;
  TokenLogprobs token_logprobs;
  std::vector<double> rewards;     // C
  std::vector<bool> terminated;    // C, sticky once set until reset
  std::vector<bool> truncated;     // C, sticky once set until reset
  std::vector<bool> valid;         // C
  std::vector<std::int64_t> episode_uid; // C, -1 for frozen slots
  std::vector<Observation> post_obs;     // C, obs after each slot, pre-reset
  double value_scalar = 0.0;       // scalar head V(obs)
  std::vector<double> value_vector; // C-vector head V(obs)

  bool operator==(const StepRecord&) const = default;
};

/// Closed episode bookkeeping. Times are atomic-step indices on the owning
/// env's timeline; in-episode indices start at 0.
struct EpisodeInfo {
  std::int64_t uid = -1;    // unique within a rollout
  int env_id = -1;
  std::int64_t start_step = 0;      // global atomic index of first step
  std::int64_t length = 0;          // atomic steps actually executed
  double total_reward = 0.0;        // undiscounted sum over the episode
  bool success = false;             // success_once criterion
  std::int64_t first_success_step = -1; // in-episode atomic index, -1 if none
  bool ended_by_truncation = false;
  bool complete = false;            // false for the episode still running at rollout end
  GroupKey group_key;

  bool operator==(const EpisodeInfo&) const = default;
};

/// The rollout's single source of truth: per-env time-indexed records plus
/// the episode table partitioning each env's atomic timeline.
struct TrajectorySlab {
  int num_envs = 0;
  int chunk_length = 0; // C
  int tokens_per_action = 0; // M
  std::vector<std::vector<StepRecord>> records;  // [env][chunk index]
  std::vector<EpisodeInfo> episodes;             // all envs, closed + trailing open

  bool operator==(const TrajectorySlab&) const = default;

  std::int64_t total_frames() const {
    std::int64_t n = 0;
    for (const auto& env_records : records)
      n += static_cast<std::int64_t>(env_records.size()) * chunk_length;
    return n;
  }
};

/// Writes the slab as a columnar text dump, one row per atomic step:
/// env_id episode_uid step tok0..tokM-1 reward terminated truncated valid
std::string dump_slab(const TrajectorySlab& slab);

} // namespace chunkrl
