#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chunkrl/harness/config.hpp"
#include "chunkrl/harness/metrics.hpp"
#include "chunkrl/policy/policy_net.hpp"

namespace chunkrl::harness {

struct TrainResult {
  std::vector<EpochMetrics> history;
  policy::PolicyDescriptor descriptor;

  double final_success_rate() const {
    return history.empty() ? 0.0 : history.back().success_rate;
  }
  double best_success_rate() const;
  /// First epoch whose success rate reaches the threshold; -1 if never.
  int first_epoch_reaching(double threshold) const;
};

/// End-to-end training driver: rollout (through the configured backend and
/// placement plan) -> advantage assembly -> update, once per epoch. Writes
/// metrics.jsonl, manifest.json, checkpoint.bin, success_rate.svg and a
/// trajectory dump of the final epoch under run_dir when set.
TrainResult cmd_train(const RunConfig& config,
                      const std::function<void(const EpochMetrics&)>& on_epoch = {});

} // namespace chunkrl::harness
