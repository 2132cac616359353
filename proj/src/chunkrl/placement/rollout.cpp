#include "chunkrl/placement/rollout.hpp"

#include <algorithm>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::placement {

using envsim::VecEnv;

StageSim::StageSim(const RolloutSpec& spec, int stage, int stage_count) : spec_(spec), stage_(stage) {
  if (spec.env_config.num_envs % stage_count != 0)
    throw ConfigError("pipeline stage count must divide num_envs");
  int per = spec.env_config.num_envs / stage_count;
  env_ = std::make_unique<VecEnv>(spec.env_config, stage * per, per);
  records_.resize(static_cast<std::size_t>(per));
}

std::vector<Observation> StageSim::initial_obs() {
  const std::vector<int>* ids = nullptr;
  std::vector<int> local_ids;
  if (spec_.reset_state_ids) {
    const auto& all = *spec_.reset_state_ids;
    if (static_cast<int>(all.size()) != spec_.env_config.num_envs)
      throw LengthMismatch("reset_state_ids must cover every env");
    local_ids.assign(all.begin() + env_->first_env_id(),
                     all.begin() + env_->first_env_id() + env_->num_envs());
    ids = &local_ids;
  }
  cur_obs_ = env_->reset_all(ids);
  return cur_obs_;
}

std::vector<Observation> StageSim::execute(const GenBatch& gen) {
  int n = env_->num_envs();
  if (static_cast<int>(gen.chunks.size()) != n)
    throw LengthMismatch("generation batch size mismatch");
  std::vector<envsim::ChunkResult> results = env_->chunk_step(gen.chunks, spec_.reset_mode);
  std::vector<Observation> next(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    envsim::ChunkResult& cr = results[static_cast<std::size_t>(i)];
    StepRecord rec;
    rec.obs = cur_obs_[static_cast<std::size_t>(i)];
    rec.chunk = cr.chunk;
    rec.token_logprobs = gen.logprobs[static_cast<std::size_t>(i)];
    rec.rewards = std::move(cr.rewards);
    rec.terminated = std::move(cr.terminated);
    rec.truncated = std::move(cr.truncated);
    rec.valid = std::move(cr.valid);
    rec.episode_uid = std::move(cr.episode_uid);
    rec.post_obs = std::move(cr.post_obs);
    rec.value_scalar = gen.value_scalar[static_cast<std::size_t>(i)];
    rec.value_vector = gen.value_vector[static_cast<std::size_t>(i)];
    records_[static_cast<std::size_t>(i)].push_back(std::move(rec));
    next[static_cast<std::size_t>(i)] = std::move(cr.next_obs);
  }
  cur_obs_ = next;
  return next;
}

StageGen::StageGen(const policy::PolicyNet& snapshot, const RolloutSpec& spec)
    : snapshot_(&snapshot) {
  rngs_.reserve(static_cast<std::size_t>(spec.env_config.num_envs));
  for (int e = 0; e < spec.env_config.num_envs; ++e)
    rngs_.emplace_back(mix_seed(spec.sample_seed, 0xac7100full + static_cast<std::uint64_t>(e)));
}

GenBatch StageGen::generate(int first_env_id, const std::vector<Observation>& obs) {
  GenBatch out;
  out.chunks.reserve(obs.size());
  out.logprobs.reserve(obs.size());
  out.value_scalar.reserve(obs.size());
  out.value_vector.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    Rng& rng = rngs_.at(static_cast<std::size_t>(first_env_id) + i);
    policy::SampleResult sample = snapshot_->sample_chunk(obs[i], rng);
    out.chunks.push_back(std::move(sample.chunk));
    out.logprobs.push_back(std::move(sample.token_logprobs));
    out.value_scalar.push_back(snapshot_->value(obs[i], policy::ValueHeadKind::Scalar)[0]);
    out.value_vector.push_back(snapshot_->value(obs[i], policy::ValueHeadKind::Vector));
  }
  return out;
}

TrajectorySlab merge_stages(const RolloutSpec& spec, std::vector<StageSim>& stages) {
  TrajectorySlab slab;
  slab.num_envs = spec.env_config.num_envs;
  slab.chunk_length = spec.env_config.chunk_length;
  slab.records.resize(static_cast<std::size_t>(slab.num_envs));
  for (StageSim& stage : stages) {
    const auto& recs = stage.records();
    for (std::size_t i = 0; i < recs.size(); ++i)
      slab.records[static_cast<std::size_t>(stage.first_env_id()) + i] = recs[i];
    std::vector<EpisodeInfo> eps = stage.episode_table();
    slab.episodes.insert(slab.episodes.end(), eps.begin(), eps.end());
  }
  if (!stages.empty()) {
    // M is env-defined; probe through a temporary env of the same config.
    envsim::VecEnv probe(spec.env_config, 0, 1);
    slab.tokens_per_action = probe.tokens_per_action();
  }
  std::sort(slab.episodes.begin(), slab.episodes.end(),
            [](const EpisodeInfo& a, const EpisodeInfo& b) {
              if (a.env_id != b.env_id)
                return a.env_id < b.env_id;
              return a.start_step < b.start_step;
            });
  return slab;
}

} // namespace chunkrl::placement
