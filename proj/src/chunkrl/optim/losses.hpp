#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chunkrl/advantage/assembler.hpp"
#include "chunkrl/policy/policy_net.hpp"

namespace chunkrl::optim {

struct PpoParams {
  double clip_eps = 0.2;
  double value_loss_coef = 0.5;
  double entropy_coef = 0.0;
  int epochs_per_batch = 4;
  int minibatch_size = 64; // chunk records per minibatch
  double learning_rate = 3e-4;
  double max_grad_norm = 1.0;
  bool advantage_normalization = true; // batch-level whitening
};

struct GrpoParams {
  double clip_eps = 0.2;
  int epochs_per_batch = 1;
  int minibatch_groups = 0; // 0 = all groups per step
  double learning_rate = 3e-4;
  double max_grad_norm = 1.0;
};

struct LossDiagnostics {
  double loss = 0.0;
  double surrogate = 0.0;  // already negated into loss
  double value_loss = 0.0; // unweighted MSE
  double entropy = 0.0;    // mean entropy over counted token positions
  double clip_frac = 0.0;
  double approx_kl = 0.0;
  std::int64_t units = 0; // logprob-level units that entered the surrogate
};

/// Importance ratio between logprobs at the same granularity.
double importance_ratio(double new_logprob, double old_logprob);

/// Clipped-surrogate PPO loss over the selected records:
///   loss = -(1/N_adv) sum_units min(rho*A, clip(rho)*A)
///        + value_loss_coef * mean_value_units (V - R)^2
///        - entropy_coef * mean_positions H.
/// The surrogate normalizer counts advantage-level units; finer logprob
/// units are summed inside their advantage unit, which makes the
/// token-broadcast gradient coincide with the chunk-level gradient when
/// rho == 1. If grad_out is non-null the analytic gradient is accumulated
/// into it (it must be zeroed by the caller). Throws NonFinite on
/// non-finite loss terms.
LossDiagnostics ppo_loss(const policy::PolicyNet& net, const advantage::PpoBatch& batch,
                         std::span<const std::size_t> record_indices,
                         const PpoParams& params, std::vector<double>* grad_out);

/// GRPO objective over the selected groups. Per-step weights already encode
/// the base (1/|tau|) or length-normalized (1/T_succ, masked) mode:
///   loss = -(1/N_groups) sum_g (1/G_g) sum_i sum_units w_u
///              * min(rho*A_i, clip(rho)*A_i).
/// Throws SkipUpdate when no groups are selected.
LossDiagnostics grpo_loss(const policy::PolicyNet& net, const advantage::GrpoBatch& batch,
                          std::span<const std::size_t> group_indices,
                          const GrpoParams& params, std::vector<double>* grad_out);

} // namespace chunkrl::optim
