#pragma once

#include <string>
#include <vector>

#include "chunkrl/advantage/gae.hpp"
#include "chunkrl/advantage/grpo.hpp"
#include "chunkrl/core/granularity.hpp"
#include "chunkrl/envsim/vec_env.hpp"
#include "chunkrl/optim/losses.hpp"
#include "chunkrl/placement/cost_model.hpp"
#include "chunkrl/placement/plan.hpp"

namespace chunkrl::harness {

enum class Algo { Ppo, Grpo };
enum class Backend { Virtual, Real };

struct AlgorithmConfig {
  Algo name = Algo::Ppo;
  GranularitySpec granularity; // reward_type / logprob_type / value_type
  advantage::GaeParams gae;
  double clip_eps = 0.2;
  double value_loss_coef = 0.5;
  double entropy_coef = 0.0;
  int epochs_per_batch = 4;
  int minibatch_size = 64;
  double learning_rate = 3e-4;
  double max_grad_norm = 1.0;
  bool advantage_normalization = true;
  double eps_std = 1e-8;
  bool filter_enabled = true;
  advantage::FilterBounds filter_bounds;
  bool length_normalization = true;
  int group_size = 8;  // G
  int num_groups = 8;
  int rollout_chunks = 10; // chunk steps per env per epoch (PPO)

  bool operator==(const AlgorithmConfig&) const = default;
};

struct PolicyConfig {
  int hidden = 32;
  int trunk_layers = 2;
  int value_hidden = 32;

  bool operator==(const PolicyConfig&) const = default;
};

struct BenchConfig {
  std::vector<std::string> presets{"1to1", "15to1"};
  /// Labels from the standard plan set to run; empty = all of
  /// {disaggregated, colocated, hybrid-k1, hybrid-k2}.
  std::vector<std::string> plans;

  bool operator==(const BenchConfig&) const = default;
};

struct RunConfig {
  std::uint64_t seed = 0;
  int epochs = 50;
  std::string run_dir; // metrics/manifest/plots/checkpoint; empty = no files
  Backend backend = Backend::Virtual;
  envsim::VecEnvConfig env;
  AlgorithmConfig algorithm;
  PolicyConfig policy;
  placement::PlacementPlan plan;
  std::string cost_preset = "1to1";
  BenchConfig bench;

  bool operator==(const RunConfig&) const = default;
};

/// Parses YAML text into a RunConfig, applying defaults and the cross-field
/// validation rules (granularity table, value/reward tie, rollout-mode
/// pairings per algorithm, GRPO grouping constraints). Unknown keys are
/// rejected. Throws ConfigError with the offending key path.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides = {});

/// Serializes every field; load(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Applies "dotted.key=value" overrides to YAML text.
std::string apply_overrides(const std::string& yaml_text,
                            const std::vector<std::string>& overrides);

/// FNV-1a hash of the canonical serialization, for the run manifest.
std::uint64_t config_hash(const RunConfig& config);

} // namespace chunkrl::harness
