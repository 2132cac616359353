#include "chunkrl/advantage/gae.hpp"

#include "chunkrl/core/errors.hpp"

namespace chunkrl::advantage {

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const double> bootstrap,
                      const std::vector<bool>& terminated,
                      const std::vector<bool>& truncated,
                      const GaeParams& params) {
  std::size_t n = rewards.size();
  if (values.size() != n || bootstrap.size() != n || terminated.size() != n ||
      truncated.size() != n)
    throw LengthMismatch("compute_gae: input lengths differ");

  GaeResult res;
  res.advantages.assign(n, 0.0);
  res.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    double vnext;
    if (terminated[i])
      vnext = 0.0;
    else if (truncated[i] || i + 1 == n)
      vnext = bootstrap[i];
    else
      vnext = values[i + 1];
    double delta = rewards[i] + params.gamma * vnext - values[i];
    bool done = terminated[i] || truncated[i];
    double adv = delta + params.gamma * params.lambda * (done ? 0.0 : next_adv);
    res.advantages[i] = adv;
    res.returns[i] = adv + values[i];
    next_adv = adv;
  }
  return res;
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double bootstrap, const std::vector<bool>& terminated,
                      const std::vector<bool>& truncated, const GaeParams& params) {
  std::vector<double> boot(rewards.size(), 0.0);
  if (!boot.empty())
    boot.back() = bootstrap;
  return compute_gae(rewards, values, boot, terminated, truncated, params);
}

} // namespace chunkrl::advantage
