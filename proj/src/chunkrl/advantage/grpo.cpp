#include "chunkrl/advantage/grpo.hpp"

#include <cmath>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::advantage {

std::vector<double> grpo_group_advantage(const GroupBatch& batch, double eps_std) {
  std::size_t g = batch.size();
  if (g < 2)
    throw DegenerateGroup("GRPO group needs at least 2 trajectories");
  double mean = 0.0;
  for (double r : batch.total_rewards)
    mean += r;
  mean /= static_cast<double>(g);
  double var = 0.0;
  for (double r : batch.total_rewards)
    var += (r - mean) * (r - mean);
  var /= static_cast<double>(g); // population variance
  double std = std::sqrt(var);
  if (std == 0.0 && eps_std == 0.0)
    throw DegenerateGroup("all trajectories in the group have equal return");
  std::vector<double> adv(g);
  for (std::size_t i = 0; i < g; ++i)
    adv[i] = (batch.total_rewards[i] - mean) / (std + eps_std);
  return adv;
}

double group_mean_return(const GroupBatch& batch) {
  double mean = 0.0;
  for (double r : batch.total_rewards)
    mean += r;
  return batch.size() ? mean / static_cast<double>(batch.size()) : 0.0;
}

std::vector<GroupBatch> success_rate_filter(const std::vector<GroupBatch>& groups,
                                            const FilterBounds& bounds) {
  std::vector<GroupBatch> kept;
  for (const GroupBatch& g : groups) {
    double mean = group_mean_return(g);
    if (mean > bounds.lower && mean < bounds.upper)
      kept.push_back(g);
  }
  return kept;
}

std::vector<bool> valid_action_mask(std::int64_t length, bool success,
                                    std::int64_t first_success_step) {
  std::vector<bool> mask(static_cast<std::size_t>(length), true);
  if (success && first_success_step >= 0)
    for (std::int64_t t = first_success_step + 1; t < length; ++t)
      mask[static_cast<std::size_t>(t)] = false;
  return mask;
}

std::vector<double> length_norm_weights(std::int64_t length, bool success,
                                        std::int64_t first_success_step,
                                        bool length_normalized) {
  std::vector<double> w(static_cast<std::size_t>(length), 0.0);
  if (length == 0)
    return w;
  if (!length_normalized) {
    double u = 1.0 / static_cast<double>(length);
    for (auto& x : w)
      x = u;
    return w;
  }
  std::vector<bool> mask = valid_action_mask(length, success, first_success_step);
  std::int64_t t_succ = 0;
  for (bool m : mask)
    if (m)
      ++t_succ;
  double u = 1.0 / static_cast<double>(t_succ);
  for (std::int64_t t = 0; t < length; ++t)
    if (mask[static_cast<std::size_t>(t)])
      w[static_cast<std::size_t>(t)] = u;
  return w;
}

} // namespace chunkrl::advantage
