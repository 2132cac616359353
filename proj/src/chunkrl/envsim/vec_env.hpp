#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chunkrl/core/rng.hpp"
#include "chunkrl/core/types.hpp"

namespace chunkrl::envsim {

enum class EnvKind { ToyReach, Scripted };

struct VecEnvConfig {
  EnvKind kind = EnvKind::ToyReach;
  int num_envs = 1;
  int max_episode_steps = 40; // atomic steps
  bool auto_reset = true;
  bool ignore_terminations = false;
  bool use_fixed_reset_state_ids = false;
  std::uint64_t seed = 0;
  int chunk_length = 4; // C

  // ToyReach parameters.
  int grid_size = 5;
  bool reward_shaping = false;
  int num_reset_states = 64;

  // Scripted parameters: env "succeeds" at this in-episode atomic step.
  int success_step = 5;

  bool operator==(const VecEnvConfig&) const = default;
};

enum class ResetMode { Immediate, Deferred };

/// Result of one vectorized atomic step.
struct StepResult {
  std::vector<Observation> obs;      // post-reset obs when auto_reset fired
  std::vector<double> reward;
  std::vector<bool> terminated;      // reported false under ignore_terminations
  std::vector<bool> truncated;
  std::vector<bool> valid;           // false when the env was frozen
  std::vector<std::optional<Observation>> final_obs; // pre-reset terminal obs
};

/// C-length fragment produced by chunk_step for one environment.
struct ChunkResult {
  ActionChunk chunk;
  std::vector<double> rewards;
  std::vector<bool> terminated;
  std::vector<bool> truncated;
  std::vector<bool> valid;
  std::vector<std::int64_t> episode_uid;
  std::vector<Observation> post_obs; // obs after each slot, pre-reset
  Observation next_obs;              // obs the next chunk will be sampled from
};

/// Vectorized environment with the unified interface: reset / step /
/// chunk_step plus auto_reset, ignore_terminations and fixed reset-state
/// ids. One instance is single-writer; partitions for pipelining are
/// independent instances that never share mutable state.
class VecEnv {
public:
  /// env ids are global: a partition covering ids [first_env_id,
  /// first_env_id + count) behaves identically to the same slice of a
  /// full-width instance.
  VecEnv(const VecEnvConfig& config, int first_env_id, int count);
  explicit VecEnv(const VecEnvConfig& config) : VecEnv(config, 0, config.num_envs) {}

  const VecEnvConfig& config() const { return config_; }
  int num_envs() const { return count_; }
  int first_env_id() const { return first_env_id_; }
  int observation_dim() const;
  int vocab_size() const;
  int tokens_per_action() const; // M
  int chunk_length() const { return config_.chunk_length; }
  int task_id() const { return 0; }
  int reset_table_size() const { return config_.num_reset_states; }

  /// Resets the listed envs (local indices). If reset_state_ids is given it
  /// must be per listed env; required when use_fixed_reset_state_ids.
  /// Throws BadResetId for out-of-table ids.
  std::vector<Observation> reset(const std::vector<int>& env_ids,
                                 const std::vector<int>* reset_state_ids = nullptr);
  std::vector<Observation> reset_all(const std::vector<int>* reset_state_ids = nullptr);

  StepResult step(const std::vector<TokenAction>& actions);

  std::vector<ChunkResult> chunk_step(const std::vector<ActionChunk>& chunks,
                                      ResetMode reset_mode);

  Observation current_obs(int local_env) const;

  /// Episodes closed so far plus, per env, the still-open episode
  /// (complete=false) when one is running.
  std::vector<EpisodeInfo> episode_table() const;
  std::int64_t completed_episode_count(int local_env) const;

  /// Splits the configured env width into k contiguous partitions.
  static std::vector<std::unique_ptr<VecEnv>> make_partitions(const VecEnvConfig& config,
                                                              int k);

private:
  struct EnvState {
    int global_id = 0;
    Rng rng;
    // ToyReach state.
    int agent_x = 0, agent_y = 0, target_x = 0, target_y = 0;
    // Common episode state.
    std::int64_t episode_step = 0;  // atomic steps taken in current episode
    std::int64_t global_step = 0;   // atomic steps on this env's timeline
    std::int64_t episode_uid = -1;
    std::int64_t episode_start = 0;
    double episode_reward = 0.0;
    std::int64_t first_success = -1; // in-episode index
    bool terminated = false;
    bool truncated = false;
    bool awaiting_reset = true; // frozen until reset() is called
    int reset_state_id = -1;

    explicit EnvState(std::uint64_t seed, int id) : global_id(id), rng(seed) {}
  };

  struct SlotOutcome {
    double reward = 0.0;
    bool terminated = false;
    bool truncated = false;
    bool valid = false;
    std::int64_t episode_uid = -1;
    Observation post_obs;
    std::optional<Observation> final_obs;
  };

  void reset_env(EnvState& env, std::optional<int> reset_state_id);
  SlotOutcome step_env(EnvState& env, const TokenAction& action);
  void close_episode(EnvState& env, bool by_truncation);
  Observation observe(const EnvState& env) const;
  void layout_for_id(int reset_state_id, int& ax, int& ay, int& tx, int& ty) const;
  void random_layout(EnvState& env, int& ax, int& ay, int& tx, int& ty) const;

  VecEnvConfig config_;
  int first_env_id_ = 0;
  int count_ = 0;
  std::vector<EnvState> envs_;
  std::vector<EpisodeInfo> closed_episodes_;
  std::int64_t next_episode_uid_ = 0;
};

EnvKind env_kind_from_name(const std::string& name);
const char* env_kind_name(EnvKind kind);

} // namespace chunkrl::envsim
