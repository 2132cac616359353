#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "chunkrl/core/rng.hpp"
#include "chunkrl/core/types.hpp"
#include "chunkrl/envsim/vec_env.hpp"
#include "chunkrl/policy/policy_net.hpp"

namespace chunkrl::placement {

/// Everything that fixes the rollout math (identical across placement
/// modes, pipeline depths and backends by contract).
struct RolloutSpec {
  envsim::VecEnvConfig env_config;
  int num_chunks = 10; // chunk steps per env per epoch
  envsim::ResetMode reset_mode = envsim::ResetMode::Immediate;
  std::optional<std::vector<int>> reset_state_ids; // per global env
  std::uint64_t sample_seed = 0;
};

/// Generation output for one stage's env batch.
struct GenBatch {
  std::vector<ActionChunk> chunks;
  std::vector<TokenLogprobs> logprobs;
  std::vector<double> value_scalar;
  std::vector<std::vector<double>> value_vector;
};

/// Simulator side of one pipeline stage: owns an env partition and the
/// growing slab rows for its envs. Single-writer.
class StageSim {
public:
  StageSim(const RolloutSpec& spec, int stage, int stage_count);

  int stage() const { return stage_; }
  int env_count() const { return env_->num_envs(); }
  int first_env_id() const { return env_->first_env_id(); }

  /// Resets every env (with the spec's reset ids when given) and returns
  /// the initial observation batch.
  std::vector<Observation> initial_obs();

  /// Executes one chunk per env, appends the step records, and returns the
  /// observations for the next chunk.
  std::vector<Observation> execute(const GenBatch& gen);

  const std::vector<std::vector<StepRecord>>& records() const { return records_; }
  std::vector<EpisodeInfo> episode_table() const { return env_->episode_table(); }

private:
  RolloutSpec spec_;
  int stage_ = 0;
  std::unique_ptr<envsim::VecEnv> env_;
  std::vector<Observation> cur_obs_;
  std::vector<std::vector<StepRecord>> records_; // [local env][chunk]
};

/// Generation side: samples chunks with the snapshot policy using one rng
/// stream per global env, so results are independent of stage layout.
class StageGen {
public:
  StageGen(const policy::PolicyNet& snapshot, const RolloutSpec& spec);

  GenBatch generate(int first_env_id, const std::vector<Observation>& obs);

private:
  const policy::PolicyNet* snapshot_;
  std::vector<Rng> rngs_; // per global env
};

/// Merges per-stage records into one slab (episodes sorted canonically by
/// env then start step, so the result is independent of stage layout).
TrajectorySlab merge_stages(const RolloutSpec& spec, std::vector<StageSim>& stages);

} // namespace chunkrl::placement
