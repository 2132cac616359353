#pragma once

#include <span>
#include <string>
#include <vector>

#include "chunkrl/advantage/gae.hpp"
#include "chunkrl/core/rng.hpp"

namespace chunkrl::harness {

struct OracleReport {
  std::vector<std::string> lines;
  int checks = 0;
  int failures = 0;
  bool passed() const { return failures == 0 && checks > 0; }
};

/// Independent GAE evaluation by the explicit double sum
///   A_t = sum_k (gamma*lambda)^k * delta_{t+k} * prod_{m<k} (1 - done_{t+m})
/// (no recursion shared with the production path).
std::vector<double> gae_double_sum_oracle(std::span<const double> rewards,
                                          std::span<const double> values,
                                          std::span<const double> bootstrap,
                                          const std::vector<bool>& terminated,
                                          const std::vector<bool>& truncated,
                                          const advantage::GaeParams& params);

/// 500 random instances (length <= 12, random gamma/lambda/dones) against
/// the double-sum oracle at 1e-10 absolute. tolerance_scale shrinks the
/// tolerance (the negative control passes ~0).
OracleReport oracle_gae(double tolerance_scale = 1.0);

/// Central finite differences (h=1e-5) against the analytic gradients of
/// the PPO and GRPO losses on random small nets and batches; relative error
/// <= 1e-4 over `draws` draws of each.
OracleReport oracle_gradients(int draws = 100, double tolerance_scale = 1.0);

/// Virtual-clock schedules against hand-derived makespans for the strict
/// k=1 alternation and the k=2 pipeline, plus the steady-state formula
/// T*max(S,G) + fill for matched costs.
OracleReport oracle_makespan(double tolerance_scale = 1.0);

/// Empirical token frequencies over 1e5 sampled chunks against softmax
/// probabilities within 3-sigma binomial bounds.
OracleReport oracle_sampling(double tolerance_scale = 1.0);

/// Runs the named suite ("gae", "gradients", "makespan", "sampling",
/// "all"). tamper replaces tolerances with impossible ones as a negative
/// control: the report must then fail.
OracleReport cmd_oracle(const std::string& suite, bool tamper = false);

} // namespace chunkrl::harness
