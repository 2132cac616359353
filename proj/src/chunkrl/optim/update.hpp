#pragma once

#include "chunkrl/core/rng.hpp"
#include "chunkrl/optim/adam.hpp"
#include "chunkrl/optim/losses.hpp"

namespace chunkrl::optim {

struct UpdateMetrics {
  double loss = 0.0; // mean over minibatch steps
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0; // last step, pre-clip
  int steps = 0;
  bool skipped = false;
};

/// Runs epochs_per_batch passes of seeded-shuffled minibatch Adam steps
/// over the PPO batch. Advantage whitening (population std over counted
/// units) is applied once up front when enabled.
UpdateMetrics update_ppo(policy::PolicyNet& net, advantage::PpoBatch& batch,
                         const PpoParams& params, Adam& adam, Rng& rng);

/// Same over GRPO groups; group integrity is preserved inside minibatches.
/// Returns skipped=true when the batch holds no groups.
UpdateMetrics update_grpo(policy::PolicyNet& net, const advantage::GrpoBatch& batch,
                          const GrpoParams& params, Adam& adam, Rng& rng);

/// In-place whitening of counted advantage units (mean 0, population std 1).
void normalize_advantages(advantage::PpoBatch& batch);

} // namespace chunkrl::optim
