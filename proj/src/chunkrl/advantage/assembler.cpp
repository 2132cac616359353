#include "chunkrl/advantage/assembler.hpp"

#include <algorithm>
#include <map>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::advantage {

namespace {

using policy::PolicyNet;
using policy::ValueHeadKind;

struct ActionUnit {
  int record = 0; // index into the env's record vector
  int slot = 0;
  double reward = 0.0;
  double value = 0.0;
  bool terminated = false;
  bool truncated = false;
};

struct ChunkUnit {
  int record = 0;
  double reward = 0.0;
  double value = 0.0;
  bool terminated = false;
  bool truncated = false;
  int last_slot = 0; // slot whose post_obs bootstraps a truncation
};

// Runs GAE over one segment and scatters results into the views.
template <typename Unit, typename Scatter, typename Bootstrap>
void flush_segment(std::vector<Unit>& seg, bool open_end, const GaeParams& params,
                   Bootstrap&& bootstrap_value, Scatter&& scatter) {
  if (seg.empty())
    return;
  std::size_t n = seg.size();
  std::vector<double> rewards(n), values(n), boot(n, 0.0);
  std::vector<bool> term(n), trunc(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = seg[i].reward;
    values[i] = seg[i].value;
    term[i] = seg[i].terminated;
    trunc[i] = seg[i].truncated;
    if (seg[i].truncated)
      boot[i] = bootstrap_value(seg[i]);
  }
  if (open_end && !seg.back().terminated && !seg.back().truncated)
    boot[n - 1] = bootstrap_value(seg.back());
  GaeResult gae = compute_gae(rewards, values, boot, term, trunc, params);
  for (std::size_t i = 0; i < n; ++i)
    scatter(seg[i], gae.advantages[i], gae.returns[i]);
  seg.clear();
}

} // namespace

std::int64_t PpoBatch::advantage_unit_count() const {
  std::int64_t n = 0;
  for (const PpoRecordView& view : records) {
    if (spec.advantage_level == Level::Chunk) {
      for (bool c : view.counted)
        if (c) {
          ++n;
          break;
        }
    } else {
      for (bool c : view.counted)
        if (c)
          ++n;
    }
  }
  return n;
}

PpoBatch assemble_ppo_batch(const TrajectorySlab& slab, const PolicyNet& snapshot,
                            const PpoAssemblyOptions& options) {
  validate_granularity(options.spec);
  if (options.spec.value_level != options.spec.advantage_level)
    throw ConfigError("value_type must match reward_type for GAE assembly");

  PpoBatch batch;
  batch.spec = options.spec;
  batch.C = slab.chunk_length;
  batch.M = slab.tokens_per_action;
  const int C = slab.chunk_length;
  const bool action_level = options.spec.advantage_level == Level::Action;

  // Views aligned with the slab, env-major then time order.
  std::vector<std::vector<std::size_t>> view_index(static_cast<std::size_t>(slab.num_envs));
  for (int e = 0; e < slab.num_envs; ++e) {
    const auto& recs = slab.records[static_cast<std::size_t>(e)];
    for (std::size_t t = 0; t < recs.size(); ++t) {
      PpoRecordView view;
      view.rec = &recs[t];
      view.env = e;
      view.chunk_index = static_cast<int>(t);
      view.counted.assign(static_cast<std::size_t>(C), false);
      view.advantages.assign(action_level ? static_cast<std::size_t>(C) : 1u, 0.0);
      view.returns.assign(action_level ? static_cast<std::size_t>(C) : 1u, 0.0);
      view_index[static_cast<std::size_t>(e)].push_back(batch.records.size());
      batch.records.push_back(std::move(view));
    }
  }

  for (int e = 0; e < slab.num_envs; ++e) {
    const auto& recs = slab.records[static_cast<std::size_t>(e)];
    const auto& views = view_index[static_cast<std::size_t>(e)];
    if (action_level) {
      std::vector<ActionUnit> seg;
      std::int64_t seg_uid = -1;
      auto boot = [&](const ActionUnit& u) {
        const StepRecord& rec = recs[static_cast<std::size_t>(u.record)];
        return snapshot.value(rec.post_obs[static_cast<std::size_t>(u.slot)],
                              ValueHeadKind::Vector)[0];
      };
      auto scatter = [&](const ActionUnit& u, double adv, double ret) {
        PpoRecordView& view = batch.records[views[static_cast<std::size_t>(u.record)]];
        view.counted[static_cast<std::size_t>(u.slot)] = true;
        view.advantages[static_cast<std::size_t>(u.slot)] = adv;
        view.returns[static_cast<std::size_t>(u.slot)] = ret;
      };
      for (std::size_t t = 0; t < recs.size(); ++t) {
        const StepRecord& rec = recs[t];
        for (int j = 0; j < C; ++j) {
          if (!rec.valid[static_cast<std::size_t>(j)])
            continue;
          std::int64_t uid = rec.episode_uid[static_cast<std::size_t>(j)];
          if (!seg.empty() && uid != seg_uid)
            flush_segment(seg, /*open_end=*/true, options.gae, boot, scatter);
          seg_uid = uid;
          seg.push_back(ActionUnit{static_cast<int>(t), j,
                                   rec.rewards[static_cast<std::size_t>(j)],
                                   rec.value_vector[static_cast<std::size_t>(j)],
                                   static_cast<bool>(rec.terminated[static_cast<std::size_t>(j)]),
                                   static_cast<bool>(rec.truncated[static_cast<std::size_t>(j)])});
          if (rec.terminated[static_cast<std::size_t>(j)] ||
              rec.truncated[static_cast<std::size_t>(j)])
            flush_segment(seg, /*open_end=*/false, options.gae, boot, scatter);
        }
      }
      flush_segment(seg, /*open_end=*/true, options.gae, boot, scatter);
    } else {
      std::vector<ChunkUnit> seg;
      std::int64_t seg_uid = -1;
      auto boot = [&](const ChunkUnit& u) {
        const StepRecord& rec = recs[static_cast<std::size_t>(u.record)];
        return snapshot.value(rec.post_obs[static_cast<std::size_t>(u.last_slot)],
                              ValueHeadKind::Scalar)[0];
      };
      auto scatter = [&](const ChunkUnit& u, double adv, double ret) {
        PpoRecordView& view = batch.records[views[static_cast<std::size_t>(u.record)]];
        view.advantages[0] = adv;
        view.returns[0] = ret;
      };
      for (std::size_t t = 0; t < recs.size(); ++t) {
        const StepRecord& rec = recs[t];
        int first_valid = -1;
        for (int j = 0; j < C; ++j)
          if (rec.valid[static_cast<std::size_t>(j)]) {
            first_valid = j;
            break;
          }
        if (first_valid < 0)
          continue; // fully frozen chunk
        std::int64_t lead_uid = rec.episode_uid[static_cast<std::size_t>(first_valid)];
        if (!seg.empty() && lead_uid != seg_uid)
          flush_segment(seg, /*open_end=*/true, options.gae, boot, scatter);
        seg_uid = lead_uid;

        ChunkUnit unit;
        unit.record = static_cast<int>(t);
        unit.value = rec.value_scalar;
        PpoRecordView& view = batch.records[views[t]];
        for (int j = first_valid; j < C; ++j) {
          if (!rec.valid[static_cast<std::size_t>(j)] ||
              rec.episode_uid[static_cast<std::size_t>(j)] != lead_uid)
            break; // post-reset tail slots are dropped at chunk level
          view.counted[static_cast<std::size_t>(j)] = true;
          unit.reward += rec.rewards[static_cast<std::size_t>(j)];
          unit.terminated = unit.terminated || rec.terminated[static_cast<std::size_t>(j)];
          unit.truncated = unit.truncated || rec.truncated[static_cast<std::size_t>(j)];
          unit.last_slot = j;
        }
        seg.push_back(unit);
        if (unit.terminated || unit.truncated)
          flush_segment(seg, /*open_end=*/false, options.gae, boot, scatter);
      }
      flush_segment(seg, /*open_end=*/true, options.gae, boot, scatter);
    }
  }
  return batch;
}

GrpoAssemblyResult assemble_grpo_batch(const TrajectorySlab& slab,
                                       const GrpoAssemblyOptions& options) {
  validate_granularity(options.spec);
  GrpoAssemblyResult result;
  result.batch.spec = options.spec;
  result.batch.C = slab.chunk_length;
  result.batch.M = slab.tokens_per_action;

  // Group complete episodes that started at rollout begin; later episodes
  // (partial-reset offspring) lack the shared initial state.
  std::map<GroupKey, std::vector<const EpisodeInfo*>> by_key;
  for (const EpisodeInfo& ep : slab.episodes)
    if (ep.complete && ep.start_step == 0)
      by_key[ep.group_key].push_back(&ep);

  std::vector<GroupBatch> groups;
  for (auto& [key, members] : by_key) {
    if (static_cast<int>(members.size()) < options.min_group_size)
      continue;
    GroupBatch g;
    g.key = key;
    for (const EpisodeInfo* ep : members) {
      g.total_rewards.push_back(ep->total_reward);
      g.lengths.push_back(ep->length);
      g.first_success.push_back(ep->first_success_step);
      g.episode_uids.push_back(ep->uid);
      g.env_ids.push_back(ep->env_id);
    }
    groups.push_back(std::move(g));
  }
  result.groups_total = static_cast<int>(groups.size());

  std::vector<GroupBatch> retained =
      options.apply_filter ? success_rate_filter(groups, options.filter_bounds) : groups;
  result.groups_retained = static_cast<int>(retained.size());

  for (const GroupBatch& g : retained) {
    std::vector<double> adv = grpo_group_advantage(g, options.eps_std);
    GrpoGroup group;
    group.key = g.key;
    for (std::size_t i = 0; i < g.size(); ++i) {
      GrpoTrajectory traj;
      traj.episode_uid = g.episode_uids[i];
      traj.env = g.env_ids[i];
      traj.advantage = adv[i];
      bool success = g.first_success[i] >= 0;
      std::vector<double> weights = length_norm_weights(
          g.lengths[i], success, g.first_success[i], options.length_normalized);

      const auto& recs = slab.records[static_cast<std::size_t>(traj.env)];
      std::int64_t atomic_index = 0;
      for (const StepRecord& rec : recs) {
        TrajChunk chunk;
        chunk.rec = &rec;
        for (int j = 0; j < slab.chunk_length; ++j) {
          if (!rec.valid[static_cast<std::size_t>(j)] ||
              rec.episode_uid[static_cast<std::size_t>(j)] != traj.episode_uid)
            continue;
          chunk.slots.push_back(j);
          chunk.slot_weights.push_back(weights[static_cast<std::size_t>(atomic_index)]);
          ++atomic_index;
        }
        if (!chunk.slots.empty())
          traj.chunks.push_back(std::move(chunk));
      }
      group.trajectories.push_back(std::move(traj));
    }
    result.batch.groups.push_back(std::move(group));
  }
  return result;
}

double slab_success_rate(const TrajectorySlab& slab) {
  std::int64_t total = 0, successes = 0;
  for (const EpisodeInfo& ep : slab.episodes)
    if (ep.complete) {
      ++total;
      if (ep.success)
        ++successes;
    }
  return total == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(total);
}

} // namespace chunkrl::advantage
