#include "chunkrl/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chunkrl/advantage/assembler.hpp"
#include "chunkrl/core/errors.hpp"
#include "chunkrl/optim/update.hpp"
#include "chunkrl/placement/real_backend.hpp"
#include "chunkrl/placement/virtual_clock.hpp"
#include "chunkrl/policy/checkpoint.hpp"

namespace chunkrl::harness {

using advantage::GrpoAssemblyOptions;
using advantage::PpoAssemblyOptions;
using placement::RolloutSpec;

double TrainResult::best_success_rate() const {
  double best = 0.0;
  for (const EpochMetrics& m : history)
    best = std::max(best, m.success_rate);
  return best;
}

int TrainResult::first_epoch_reaching(double threshold) const {
  for (const EpochMetrics& m : history)
    if (m.success_rate >= threshold)
      return m.epoch;
  return -1;
}

TrainResult cmd_train(const RunConfig& config,
                      const std::function<void(const EpochMetrics&)>& on_epoch) {
  const bool grpo = config.algorithm.name == Algo::Grpo;

  // Env-defined interface dimensions probed once.
  envsim::VecEnv probe(config.env, 0, 1);
  policy::PolicyDescriptor desc;
  desc.obs_dim = probe.observation_dim();
  desc.hidden = config.policy.hidden;
  desc.trunk_layers = config.policy.trunk_layers;
  desc.value_hidden = config.policy.value_hidden;
  desc.vocab = probe.vocab_size();
  desc.C = config.env.chunk_length;
  desc.M = probe.tokens_per_action();

  policy::PolicyNet net = policy::PolicyNet::initialized(desc, mix_seed(config.seed, 1));
  optim::Adam adam(net.num_params(), config.algorithm.learning_rate,
                   config.algorithm.max_grad_norm);
  Rng update_rng(mix_seed(config.seed, 2));
  Rng reset_id_rng(mix_seed(config.seed, 3));

  optim::PpoParams ppo_params;
  ppo_params.clip_eps = config.algorithm.clip_eps;
  ppo_params.value_loss_coef = config.algorithm.value_loss_coef;
  ppo_params.entropy_coef = config.algorithm.entropy_coef;
  ppo_params.epochs_per_batch = config.algorithm.epochs_per_batch;
  ppo_params.minibatch_size = config.algorithm.minibatch_size;
  ppo_params.learning_rate = config.algorithm.learning_rate;
  ppo_params.max_grad_norm = config.algorithm.max_grad_norm;
  ppo_params.advantage_normalization = config.algorithm.advantage_normalization;

  optim::GrpoParams grpo_params;
  grpo_params.clip_eps = config.algorithm.clip_eps;
  grpo_params.epochs_per_batch = config.algorithm.epochs_per_batch;
  grpo_params.learning_rate = config.algorithm.learning_rate;
  grpo_params.max_grad_norm = config.algorithm.max_grad_norm;

  placement::CostModel cost = placement::CostModel::preset(config.cost_preset);

  TrainResult result;
  result.descriptor = desc;
  std::ostringstream metrics_stream;
  std::string last_dump;

  // GRPO needs every episode closed inside the epoch; PPO uses the
  // configured rollout length.
  int num_chunks = grpo ? (config.env.max_episode_steps + config.env.chunk_length - 1) /
                              config.env.chunk_length
                        : config.algorithm.rollout_chunks;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    RolloutSpec spec;
    spec.env_config = config.env;
    spec.env_config.seed = mix_seed(config.env.seed, static_cast<std::uint64_t>(epoch));
    spec.num_chunks = num_chunks;
    spec.reset_mode = config.env.auto_reset ? envsim::ResetMode::Immediate
                                            : envsim::ResetMode::Deferred;
    spec.sample_seed = mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch));
    if (config.env.use_fixed_reset_state_ids) {
      std::vector<int> ids(static_cast<std::size_t>(config.env.num_envs), 0);
      for (int g = 0; g < config.algorithm.num_groups; ++g) {
        int id = static_cast<int>(
            reset_id_rng.next_below(static_cast<std::uint64_t>(config.env.num_reset_states)));
        for (int m = 0; m < config.algorithm.group_size; ++m)
          ids[static_cast<std::size_t>(g * config.algorithm.group_size + m)] = id;
      }
      spec.reset_state_ids = std::move(ids);
    }

    // Immutable snapshot handed to the rollout workers.
    policy::PolicyNet snapshot = net;
    TrajectorySlab slab;
    if (config.backend == Backend::Real) {
      placement::RealBackend backend(config.plan);
      slab = backend.run_rollout_epoch(spec, snapshot).slab;
    } else {
      placement::VirtualClockBackend backend(config.plan, cost);
      slab = backend.run_rollout_epoch(spec, snapshot).slab;
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.success_rate = advantage::slab_success_rate(slab);
    for (const EpisodeInfo& ep : slab.episodes)
      if (ep.complete)
        ++m.episodes;
    m.frames = slab.total_frames();

    if (grpo) {
      GrpoAssemblyOptions opts;
      opts.spec = config.algorithm.granularity;
      opts.eps_std = config.algorithm.eps_std;
      opts.apply_filter = config.algorithm.filter_enabled;
      opts.filter_bounds = config.algorithm.filter_bounds;
      opts.length_normalized = config.algorithm.length_normalization;
      advantage::GrpoAssemblyResult assembled = advantage::assemble_grpo_batch(slab, opts);
      m.groups_total = assembled.groups_total;
      m.groups_retained = assembled.groups_retained;
      optim::UpdateMetrics um =
          optim::update_grpo(net, assembled.batch, grpo_params, adam, update_rng);
      m.skipped = um.skipped;
      m.loss = um.loss;
      m.surrogate = um.surrogate;
      m.clip_frac = um.clip_frac;
      m.approx_kl = um.approx_kl;
      m.grad_norm = um.grad_norm;
    } else {
      PpoAssemblyOptions opts;
      opts.gae = config.algorithm.gae;
      opts.spec = config.algorithm.granularity;
      advantage::PpoBatch batch = advantage::assemble_ppo_batch(slab, snapshot, opts);
      optim::UpdateMetrics um = optim::update_ppo(net, batch, ppo_params, adam, update_rng);
      m.skipped = um.skipped;
      m.loss = um.loss;
      m.surrogate = um.surrogate;
      m.value_loss = um.value_loss;
      m.entropy = um.entropy;
      m.clip_frac = um.clip_frac;
      m.approx_kl = um.approx_kl;
      m.grad_norm = um.grad_norm;
    }

    metrics_stream << metrics_line(m) << "\n";
    result.history.push_back(m);
    if (on_epoch)
      on_epoch(m);
    if (epoch + 1 == config.epochs)
      last_dump = dump_slab(slab);
  }

  if (!config.run_dir.empty()) {
    write_file(config.run_dir + "/metrics.jsonl", metrics_stream.str());
    write_file(config.run_dir + "/manifest.json", manifest_json(config, "train"));
    write_file(config.run_dir + "/trajectories.txt", last_dump);
    std::vector<double> curve;
    for (const EpochMetrics& m : result.history)
      curve.push_back(m.success_rate);
    write_file(config.run_dir + "/success_rate.svg",
               svg_line_chart("success_rate vs epoch", curve));
    policy::save_checkpoint(net, config.run_dir + "/checkpoint.bin");
  }
  return result;
}

} // namespace chunkrl::harness
