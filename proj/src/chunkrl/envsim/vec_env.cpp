#include "chunkrl/envsim/vec_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::envsim {

namespace {
constexpr std::uint64_t kLayoutTableSalt = 0x7ab1e5eedull;

std::int64_t make_episode_uid(int env_id, std::int64_t per_env_index) {
  return (static_cast<std::int64_t>(env_id) << 32) | per_env_index;
}
} // namespace

EnvKind env_kind_from_name(const std::string& name) {
  if (name == "toy_reach")
    return EnvKind::ToyReach;
  if (name == "scripted")
    return EnvKind::Scripted;
  throw ConfigError("unknown env kind: " + name);
}

const char* env_kind_name(EnvKind kind) {
  return kind == EnvKind::ToyReach ? "toy_reach" : "scripted";
}

VecEnv::VecEnv(const VecEnvConfig& config, int first_env_id, int count)
    : config_(config), first_env_id_(first_env_id), count_(count) {
  if (count < 1)
    throw ConfigError("VecEnv needs at least one env");
  envs_.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    int gid = first_env_id + i;
    envs_.emplace_back(mix_seed(config.seed, static_cast<std::uint64_t>(gid)), gid);
  }
}

int VecEnv::observation_dim() const {
  return config_.kind == EnvKind::ToyReach ? 6 : 2;
}

int VecEnv::vocab_size() const { return 4; }

int VecEnv::tokens_per_action() const { return 2; }

void VecEnv::layout_for_id(int reset_state_id, int& ax, int& ay, int& tx, int& ty) const {
  // Layout table shared by every instance with the same config seed: the
  // entry depends only on (seed, id), never on the env drawing it.
  Rng r(mix_seed(mix_seed(config_.seed, kLayoutTableSalt),
                 static_cast<std::uint64_t>(reset_state_id)));
  int g = config_.grid_size;
  ax = static_cast<int>(r.next_below(static_cast<std::uint64_t>(g)));
  ay = static_cast<int>(r.next_below(static_cast<std::uint64_t>(g)));
  do {
    tx = static_cast<int>(r.next_below(static_cast<std::uint64_t>(g)));
    ty = static_cast<int>(r.next_below(static_cast<std::uint64_t>(g)));
  } while (tx == ax && ty == ay);
}

void VecEnv::random_layout(EnvState& env, int& ax, int& ay, int& tx, int& ty) const {
  int g = config_.grid_size;
  ax = static_cast<int>(env.rng.next_below(static_cast<std::uint64_t>(g)));
  ay = static_cast<int>(env.rng.next_below(static_cast<std::uint64_t>(g)));
  do {
    tx = static_cast<int>(env.rng.next_below(static_cast<std::uint64_t>(g)));
    ty = static_cast<int>(env.rng.next_below(static_cast<std::uint64_t>(g)));
  } while (tx == ax && ty == ay);
}

void VecEnv::reset_env(EnvState& env, std::optional<int> reset_state_id) {
  if (config_.use_fixed_reset_state_ids && !reset_state_id && env.reset_state_id < 0)
    throw BadResetId("use_fixed_reset_state_ids requires reset_state_ids");
  if (reset_state_id) {
    if (*reset_state_id < 0 || *reset_state_id >= config_.num_reset_states)
      throw BadResetId("reset state id " + std::to_string(*reset_state_id) +
                       " outside table of size " + std::to_string(config_.num_reset_states));
    env.reset_state_id = *reset_state_id;
  } else if (!config_.use_fixed_reset_state_ids) {
    env.reset_state_id = -1;
  }
  // else: auto-reset under fixed ids reuses the env's current id, keeping
  // group identity stable across episodes.

  if (env.reset_state_id >= 0)
    layout_for_id(env.reset_state_id, env.agent_x, env.agent_y, env.target_x, env.target_y);
  else
    random_layout(env, env.agent_x, env.agent_y, env.target_x, env.target_y);

  std::int64_t per_env_index = env.episode_uid < 0 ? 0 : (env.episode_uid & 0xffffffff) + 1;
  env.episode_uid = make_episode_uid(env.global_id, per_env_index);
  env.episode_start = env.global_step;
  env.episode_step = 0;
  env.episode_reward = 0.0;
  env.first_success = -1;
  env.terminated = false;
  env.truncated = false;
  env.awaiting_reset = false;
}

Observation VecEnv::observe(const EnvState& env) const {
  if (config_.kind == EnvKind::ToyReach) {
    double d = static_cast<double>(config_.grid_size - 1);
    if (d <= 0.0)
      d = 1.0;
    return {env.agent_x / d,
            env.agent_y / d,
            env.target_x / d,
            env.target_y / d,
            (env.target_x - env.agent_x) / d,
            (env.target_y - env.agent_y) / d};
  }
  double id_norm = env.reset_state_id >= 0
                       ? static_cast<double>(env.reset_state_id + 1) / (config_.num_reset_states + 1)
                       : 0.0;
  return {static_cast<double>(env.episode_step) / config_.max_episode_steps, id_norm};
}

void VecEnv::close_episode(EnvState& env, bool by_truncation) {
  EpisodeInfo ep;
  ep.uid = env.episode_uid;
  ep.env_id = env.global_id;
  ep.start_step = env.episode_start;
  ep.length = env.episode_step;
  ep.total_reward = env.episode_reward;
  ep.success = env.first_success >= 0;
  ep.first_success_step = env.first_success;
  ep.ended_by_truncation = by_truncation;
  ep.complete = true;
  ep.group_key = GroupKey{task_id(), env.reset_state_id};
  closed_episodes_.push_back(std::move(ep));
}

VecEnv::SlotOutcome VecEnv::step_env(EnvState& env, const TokenAction& action) {
  SlotOutcome out;
  if (env.awaiting_reset) {
    // Frozen sub-env: flags stay latched, nothing executes.
    out.terminated = env.terminated;
    out.truncated = env.truncated;
    out.valid = false;
    out.episode_uid = -1;
    out.post_obs = observe(env);
    return out;
  }

  double reward = 0.0;
  bool success_now = false;
  std::int64_t step_index = env.episode_step;

  if (config_.kind == EnvKind::ToyReach) {
    int axis = action.tokens[0] % 2;
    int delta = (action.tokens[1] % 3) - 1;
    int before = std::abs(env.agent_x - env.target_x) + std::abs(env.agent_y - env.target_y);
    int g = config_.grid_size;
    if (axis == 0)
      env.agent_x = std::clamp(env.agent_x + delta, 0, g - 1);
    else
      env.agent_y = std::clamp(env.agent_y + delta, 0, g - 1);
    int after = std::abs(env.agent_x - env.target_x) + std::abs(env.agent_y - env.target_y);
    if (config_.reward_shaping)
      reward += 0.1 * (before - after);
    success_now = after == 0;
    if (success_now)
      reward += 1.0;
  } else {
    success_now = (step_index + 1) == config_.success_step;
    if (success_now)
      reward = 1.0;
  }

  env.episode_step += 1;
  env.global_step += 1;
  env.episode_reward += reward;
  if (success_now && env.first_success < 0)
    env.first_success = step_index;

  bool terminated = success_now && !config_.ignore_terminations;
  bool truncated = env.episode_step >= config_.max_episode_steps;
  if (terminated)
    truncated = false; // termination takes precedence at the same step

  out.reward = reward;
  out.terminated = terminated;
  out.truncated = truncated;
  out.valid = true;
  out.episode_uid = env.episode_uid;
  out.post_obs = observe(env);

  if (terminated || truncated) {
    close_episode(env, truncated);
    env.terminated = terminated;
    env.truncated = truncated;
    env.awaiting_reset = true;
  }
  return out;
}

std::vector<Observation> VecEnv::reset(const std::vector<int>& env_ids,
                                       const std::vector<int>* reset_state_ids) {
  if (config_.use_fixed_reset_state_ids && reset_state_ids == nullptr)
    throw BadResetId("use_fixed_reset_state_ids requires reset_state_ids");
  if (reset_state_ids && reset_state_ids->size() != env_ids.size())
    throw LengthMismatch("reset_state_ids length must match env_ids");
  std::vector<Observation> obs;
  obs.reserve(env_ids.size());
  for (std::size_t i = 0; i < env_ids.size(); ++i) {
    EnvState& env = envs_.at(static_cast<std::size_t>(env_ids[i]));
    reset_env(env, reset_state_ids ? std::optional<int>((*reset_state_ids)[i]) : std::nullopt);
    obs.push_back(observe(env));
  }
  return obs;
}

std::vector<Observation> VecEnv::reset_all(const std::vector<int>* reset_state_ids) {
  std::vector<int> ids(static_cast<std::size_t>(count_));
  for (int i = 0; i < count_; ++i)
    ids[static_cast<std::size_t>(i)] = i;
  return reset(ids, reset_state_ids);
}

StepResult VecEnv::step(const std::vector<TokenAction>& actions) {
  if (static_cast<int>(actions.size()) != count_)
    throw LengthMismatch("step needs one action per env");
  StepResult res;
  res.obs.resize(static_cast<std::size_t>(count_));
  res.reward.resize(static_cast<std::size_t>(count_));
  res.terminated.resize(static_cast<std::size_t>(count_));
  res.truncated.resize(static_cast<std::size_t>(count_));
  res.valid.resize(static_cast<std::size_t>(count_));
  res.final_obs.resize(static_cast<std::size_t>(count_));
  for (int i = 0; i < count_; ++i) {
    EnvState& env = envs_[static_cast<std::size_t>(i)];
    SlotOutcome out = step_env(env, actions[static_cast<std::size_t>(i)]);
    if (env.awaiting_reset && config_.auto_reset) {
      res.final_obs[static_cast<std::size_t>(i)] = out.post_obs;
      reset_env(env, std::nullopt);
    }
    res.obs[static_cast<std::size_t>(i)] = observe(env);
    res.reward[static_cast<std::size_t>(i)] = out.reward;
    res.terminated[static_cast<std::size_t>(i)] = out.terminated;
    res.truncated[static_cast<std::size_t>(i)] = out.truncated;
    res.valid[static_cast<std::size_t>(i)] = out.valid;
  }
  return res;
}

std::vector<ChunkResult> VecEnv::chunk_step(const std::vector<ActionChunk>& chunks,
                                            ResetMode reset_mode) {
  if (static_cast<int>(chunks.size()) != count_)
    throw LengthMismatch("chunk_step needs one chunk per env");
  int C = config_.chunk_length;
  std::vector<ChunkResult> results(static_cast<std::size_t>(count_));
  for (int i = 0; i < count_; ++i) {
    EnvState& env = envs_[static_cast<std::size_t>(i)];
    const ActionChunk& chunk = chunks[static_cast<std::size_t>(i)];
    if (chunk.chunk_length() != C)
      throw LengthMismatch("chunk length mismatch");
    ChunkResult& r = results[static_cast<std::size_t>(i)];
    r.chunk = chunk;
    r.rewards.resize(static_cast<std::size_t>(C));
    r.terminated.resize(static_cast<std::size_t>(C));
    r.truncated.resize(static_cast<std::size_t>(C));
    r.valid.resize(static_cast<std::size_t>(C));
    r.episode_uid.resize(static_cast<std::size_t>(C));
    r.post_obs.resize(static_cast<std::size_t>(C));
    for (int j = 0; j < C; ++j) {
      if (env.awaiting_reset && config_.auto_reset && reset_mode == ResetMode::Immediate) {
        // Partial reset: the fresh episode consumes the chunk's remaining
        // actions even though they were sampled from the old observation.
        reset_env(env, std::nullopt);
      }
      SlotOutcome out = step_env(env, chunk.actions[static_cast<std::size_t>(j)]);
      r.rewards[static_cast<std::size_t>(j)] = out.reward;
      r.terminated[static_cast<std::size_t>(j)] = out.terminated;
      r.truncated[static_cast<std::size_t>(j)] = out.truncated;
      r.valid[static_cast<std::size_t>(j)] = out.valid;
      r.episode_uid[static_cast<std::size_t>(j)] = out.episode_uid;
      r.post_obs[static_cast<std::size_t>(j)] = std::move(out.post_obs);
    }
    if (env.awaiting_reset && config_.auto_reset)
      reset_env(env, std::nullopt);
    r.next_obs = observe(env);
  }
  return results;
}

Observation VecEnv::current_obs(int local_env) const {
  return observe(envs_.at(static_cast<std::size_t>(local_env)));
}

std::vector<EpisodeInfo> VecEnv::episode_table() const {
  std::vector<EpisodeInfo> table = closed_episodes_;
  for (const EnvState& env : envs_) {
    if (env.awaiting_reset || env.episode_uid < 0)
      continue;
    EpisodeInfo ep;
    ep.uid = env.episode_uid;
    ep.env_id = env.global_id;
    ep.start_step = env.episode_start;
    ep.length = env.episode_step;
    ep.total_reward = env.episode_reward;
    ep.success = env.first_success >= 0;
    ep.first_success_step = env.first_success;
    ep.ended_by_truncation = false;
    ep.complete = false;
    ep.group_key = GroupKey{task_id(), env.reset_state_id};
    table.push_back(std::move(ep));
  }
  return table;
}

std::int64_t VecEnv::completed_episode_count(int local_env) const {
  int gid = first_env_id_ + local_env;
  std::int64_t n = 0;
  for (const EpisodeInfo& ep : closed_episodes_)
    if (ep.env_id == gid)
      ++n;
  return n;
}

std::vector<std::unique_ptr<VecEnv>> VecEnv::make_partitions(const VecEnvConfig& config,
                                                             int k) {
  if (k < 1 || config.num_envs % k != 0)
    throw ConfigError("pipeline stage count must divide num_envs");
  int per = config.num_envs / k;
  std::vector<std::unique_ptr<VecEnv>> parts;
  parts.reserve(static_cast<std::size_t>(k));
  for (int s = 0; s < k; ++s)
    parts.push_back(std::make_unique<VecEnv>(config, s * per, per));
  return parts;
}

} // namespace chunkrl::envsim
