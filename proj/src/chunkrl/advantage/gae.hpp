#pragma once

#include <span>
#include <vector>

namespace chunkrl::advantage {

struct GaeParams {
  double gamma = 0.99;
  double lambda = 0.95;

  bool operator==(const GaeParams&) const = default;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns; // advantages + values
};

/// Generalized advantage estimation over one flat unit sequence (chunks or
/// atomic actions, caller's choice):
///   delta_t = r_t + gamma * Vnext_t - V_t
///   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
/// where Vnext_t is 0 past a termination, bootstrap[t] past a truncation or
/// at the sequence end, and values[t+1] otherwise. done = terminated or
/// truncated. Throws LengthMismatch on inconsistent sizes.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const double> bootstrap,
                      const std::vector<bool>& terminated,
                      const std::vector<bool>& truncated,
                      const GaeParams& params);

/// Convenience form with a single bootstrap value applied at the last unit
/// (mid-sequence truncations bootstrap with zero here; the per-unit form is
/// what the rollout assembler uses).
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double bootstrap, const std::vector<bool>& terminated,
                      const std::vector<bool>& truncated, const GaeParams& params);

} // namespace chunkrl::advantage
