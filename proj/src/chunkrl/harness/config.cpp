#include "chunkrl/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::harness {

namespace {

void check_keys(const YAML::Node& node, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!node || !node.IsMap())
    return;
  for (const auto& kv : node) {
    std::string key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ConfigError("unknown key: " + (path.empty() ? key : path + "." + key));
  }
}

template <typename T>
T get_or(const YAML::Node& node, const std::string& key, T fallback) {
  if (node && node[key])
    return node[key].as<T>();
  return fallback;
}

Level parse_level(const YAML::Node& node, const std::string& key, Level fallback) {
  if (node && node[key])
    return level_from_name(node[key].as<std::string>());
  return fallback;
}

} // namespace

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML parse error: ") + e.what());
  }
  check_keys(root, "", {"seed", "epochs", "run_dir", "backend", "env", "algorithm",
                        "policy", "cluster", "rollout", "actor", "cost_model", "bench"});

  RunConfig c;
  // Offload defaults on: the default colocated plan cannot host all three
  // components at once (Table-5-style disaggregated configs disable it
  // explicitly).
  c.plan.env_offload = c.plan.rollout_offload = c.plan.actor_offload = true;
  c.seed = get_or<std::uint64_t>(root, "seed", 0);
  c.epochs = get_or<int>(root, "epochs", 50);
  c.run_dir = get_or<std::string>(root, "run_dir", "");
  std::string backend = get_or<std::string>(root, "backend", "virtual");
  if (backend == "virtual")
    c.backend = Backend::Virtual;
  else if (backend == "real")
    c.backend = Backend::Real;
  else
    throw ConfigError("backend must be 'virtual' or 'real', got: " + backend);

  YAML::Node env = root["env"];
  check_keys(env, "env",
             {"kind", "num_envs", "max_episode_steps", "auto_reset", "ignore_terminations",
              "use_fixed_reset_state_ids", "seed", "chunk_length", "grid_size",
              "reward_shaping", "num_reset_states", "success_step", "enable_offload"});
  if (env) {
    c.env.kind = envsim::env_kind_from_name(get_or<std::string>(env, "kind", "toy_reach"));
    c.env.num_envs = get_or<int>(env, "num_envs", c.env.num_envs);
    c.env.max_episode_steps = get_or<int>(env, "max_episode_steps", c.env.max_episode_steps);
    c.env.auto_reset = get_or<bool>(env, "auto_reset", c.env.auto_reset);
    c.env.ignore_terminations =
        get_or<bool>(env, "ignore_terminations", c.env.ignore_terminations);
    c.env.use_fixed_reset_state_ids =
        get_or<bool>(env, "use_fixed_reset_state_ids", c.env.use_fixed_reset_state_ids);
    c.env.seed = get_or<std::uint64_t>(env, "seed", c.seed);
    c.env.chunk_length = get_or<int>(env, "chunk_length", c.env.chunk_length);
    c.env.grid_size = get_or<int>(env, "grid_size", c.env.grid_size);
    c.env.reward_shaping = get_or<bool>(env, "reward_shaping", c.env.reward_shaping);
    c.env.num_reset_states = get_or<int>(env, "num_reset_states", c.env.num_reset_states);
    c.env.success_step = get_or<int>(env, "success_step", c.env.success_step);
    c.plan.env_offload = get_or<bool>(env, "enable_offload", c.plan.env_offload);
  } else {
    c.env.seed = c.seed;
  }

  YAML::Node algo = root["algorithm"];
  check_keys(algo, "algorithm",
             {"name", "reward_type", "logprob_type", "value_type", "gamma", "lambda",
              "clip_eps", "value_loss_coef", "entropy_coef", "epochs_per_batch",
              "minibatch_size", "learning_rate", "max_grad_norm",
              "advantage_normalization", "eps_std", "filter_enabled", "filter_bounds",
              "length_normalization", "group_size", "num_groups", "rollout_chunks"});
  if (algo) {
    std::string name = get_or<std::string>(algo, "name", "ppo");
    if (name == "ppo")
      c.algorithm.name = Algo::Ppo;
    else if (name == "grpo")
      c.algorithm.name = Algo::Grpo;
    else
      throw ConfigError("algorithm.name must be 'ppo' or 'grpo', got: " + name);
    c.algorithm.granularity.advantage_level = parse_level(algo, "reward_type", Level::Chunk);
    c.algorithm.granularity.logprob_level = parse_level(algo, "logprob_type", Level::Chunk);
    // value_type defaults to reward_type
    c.algorithm.granularity.value_level =
        parse_level(algo, "value_type", c.algorithm.granularity.advantage_level);
    c.algorithm.gae.gamma = get_or<double>(algo, "gamma", c.algorithm.gae.gamma);
    c.algorithm.gae.lambda = get_or<double>(algo, "lambda", c.algorithm.gae.lambda);
    c.algorithm.clip_eps = get_or<double>(algo, "clip_eps", c.algorithm.clip_eps);
    c.algorithm.value_loss_coef =
        get_or<double>(algo, "value_loss_coef", c.algorithm.value_loss_coef);
    c.algorithm.entropy_coef = get_or<double>(algo, "entropy_coef", c.algorithm.entropy_coef);
    c.algorithm.epochs_per_batch =
        get_or<int>(algo, "epochs_per_batch", c.algorithm.epochs_per_batch);
    c.algorithm.minibatch_size =
        get_or<int>(algo, "minibatch_size", c.algorithm.minibatch_size);
    c.algorithm.learning_rate =
        get_or<double>(algo, "learning_rate", c.algorithm.learning_rate);
    c.algorithm.max_grad_norm =
        get_or<double>(algo, "max_grad_norm", c.algorithm.max_grad_norm);
    c.algorithm.advantage_normalization = get_or<bool>(
        algo, "advantage_normalization", c.algorithm.name == Algo::Ppo);
    c.algorithm.eps_std = get_or<double>(algo, "eps_std", c.algorithm.eps_std);
    c.algorithm.filter_enabled =
        get_or<bool>(algo, "filter_enabled", c.algorithm.filter_enabled);
    if (algo["filter_bounds"]) {
      auto bounds = algo["filter_bounds"].as<std::vector<double>>();
      if (bounds.size() != 2)
        throw ConfigError("algorithm.filter_bounds needs [lower, upper]");
      c.algorithm.filter_bounds.lower = bounds[0];
      c.algorithm.filter_bounds.upper = bounds[1];
    }
    c.algorithm.length_normalization =
        get_or<bool>(algo, "length_normalization", c.algorithm.length_normalization);
    c.algorithm.group_size = get_or<int>(algo, "group_size", c.algorithm.group_size);
    c.algorithm.num_groups = get_or<int>(algo, "num_groups", c.algorithm.num_groups);
    c.algorithm.rollout_chunks =
        get_or<int>(algo, "rollout_chunks", c.algorithm.rollout_chunks);
  }

  YAML::Node pol = root["policy"];
  check_keys(pol, "policy", {"hidden", "trunk_layers", "value_hidden"});
  if (pol) {
    c.policy.hidden = get_or<int>(pol, "hidden", c.policy.hidden);
    c.policy.trunk_layers = get_or<int>(pol, "trunk_layers", c.policy.trunk_layers);
    c.policy.value_hidden = get_or<int>(pol, "value_hidden", c.policy.value_hidden);
  }

  YAML::Node cluster = root["cluster"];
  check_keys(cluster, "cluster", {"num_slots", "component_placement"});
  if (cluster) {
    c.plan.num_slots = get_or<int>(cluster, "num_slots", c.plan.num_slots);
    YAML::Node placement = cluster["component_placement"];
    check_keys(placement, "cluster.component_placement", {"env", "rollout", "actor"});
    if (placement) {
      if (placement["env"])
        c.plan.env_slots = placement::SlotRange::parse(placement["env"].as<std::string>());
      if (placement["rollout"])
        c.plan.rollout_slots =
            placement::SlotRange::parse(placement["rollout"].as<std::string>());
      if (placement["actor"])
        c.plan.actor_slots =
            placement::SlotRange::parse(placement["actor"].as<std::string>());
    }
  }

  YAML::Node rollout = root["rollout"];
  check_keys(rollout, "rollout", {"pipeline_stage_num", "enable_offload"});
  if (rollout) {
    c.plan.pipeline_stage_num =
        get_or<int>(rollout, "pipeline_stage_num", c.plan.pipeline_stage_num);
    c.plan.rollout_offload = get_or<bool>(rollout, "enable_offload", c.plan.rollout_offload);
  }
  YAML::Node actor = root["actor"];
  check_keys(actor, "actor", {"enable_offload"});
  if (actor)
    c.plan.actor_offload = get_or<bool>(actor, "enable_offload", c.plan.actor_offload);

  YAML::Node cost = root["cost_model"];
  check_keys(cost, "cost_model", {"preset"});
  if (cost)
    c.cost_preset = get_or<std::string>(cost, "preset", c.cost_preset);

  YAML::Node bench = root["bench"];
  check_keys(bench, "bench", {"presets", "plans"});
  if (bench && bench["presets"])
    c.bench.presets = bench["presets"].as<std::vector<std::string>>();
  if (bench && bench["plans"])
    c.bench.plans = bench["plans"].as<std::vector<std::string>>();

  // Cross-field validation.
  if (c.env.num_envs < 1)
    throw ConfigError("env.num_envs must be >= 1");
  if (c.env.max_episode_steps < 1)
    throw ConfigError("env.max_episode_steps must be >= 1");
  try {
    validate_granularity(c.algorithm.granularity);
  } catch (const UnsupportedCombination& e) {
    throw ConfigError(std::string("algorithm granularity: ") + e.what());
  }
  if (c.algorithm.granularity.value_level != c.algorithm.granularity.advantage_level)
    throw ConfigError("algorithm.value_type must match algorithm.reward_type");
  if (c.algorithm.gae.gamma < 0.0 || c.algorithm.gae.gamma > 1.0)
    throw ConfigError("algorithm.gamma must be within [0,1]");
  if (c.algorithm.gae.lambda < 0.0 || c.algorithm.gae.lambda > 1.0)
    throw ConfigError("algorithm.lambda must be within [0,1]");
  if (c.algorithm.clip_eps <= 0.0)
    throw ConfigError("algorithm.clip_eps must be positive");
  if (c.algorithm.value_loss_coef < 0.0 || c.algorithm.entropy_coef < 0.0)
    throw ConfigError("loss coefficients must be non-negative");
  if (c.algorithm.filter_bounds.lower >= c.algorithm.filter_bounds.upper)
    throw ConfigError("algorithm.filter_bounds must satisfy lower < upper");

  // Rollout-mode pairings: PPO runs fixed-length or partial reset, GRPO
  // runs fixed-length or valid-action-mask.
  bool fixed_length = c.env.ignore_terminations;
  bool partial_reset = c.env.auto_reset && !c.env.ignore_terminations;
  bool mask_mode = !c.env.auto_reset && !c.env.ignore_terminations;
  if (c.algorithm.name == Algo::Ppo && !(fixed_length || partial_reset))
    throw ConfigError("PPO needs ignore_terminations=true (fixed length) or "
                      "auto_reset=true (partial reset)");
  if (c.algorithm.name == Algo::Grpo) {
    if (!(fixed_length || mask_mode))
      throw ConfigError("GRPO needs ignore_terminations=true (fixed length) or "
                        "auto_reset=false with ignore_terminations=false (valid action mask)");
    if (!c.env.use_fixed_reset_state_ids)
      throw ConfigError("GRPO requires env.use_fixed_reset_state_ids=true");
    if (c.algorithm.group_size < 2)
      throw ConfigError("algorithm.group_size must be >= 2");
    if (c.env.num_envs != c.algorithm.group_size * c.algorithm.num_groups)
      throw ConfigError("env.num_envs must equal group_size * num_groups");
  }
  validate_plan(c.plan);
  if (c.env.num_envs % c.plan.pipeline_stage_num != 0)
    throw ConfigError("rollout.pipeline_stage_num must divide env.num_envs");
  placement::CostModel::preset(c.cost_preset); // rejects unknown names
  return c;
}

std::string serialize_config(const RunConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "epochs" << YAML::Value << c.epochs;
  out << YAML::Key << "run_dir" << YAML::Value << c.run_dir;
  out << YAML::Key << "backend" << YAML::Value
      << (c.backend == Backend::Virtual ? "virtual" : "real");
  out << YAML::Key << "env" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << envsim::env_kind_name(c.env.kind);
  out << YAML::Key << "num_envs" << YAML::Value << c.env.num_envs;
  out << YAML::Key << "max_episode_steps" << YAML::Value << c.env.max_episode_steps;
  out << YAML::Key << "auto_reset" << YAML::Value << c.env.auto_reset;
  out << YAML::Key << "ignore_terminations" << YAML::Value << c.env.ignore_terminations;
  out << YAML::Key << "use_fixed_reset_state_ids" << YAML::Value
      << c.env.use_fixed_reset_state_ids;
  out << YAML::Key << "seed" << YAML::Value << c.env.seed;
  out << YAML::Key << "chunk_length" << YAML::Value << c.env.chunk_length;
  out << YAML::Key << "grid_size" << YAML::Value << c.env.grid_size;
  out << YAML::Key << "reward_shaping" << YAML::Value << c.env.reward_shaping;
  out << YAML::Key << "num_reset_states" << YAML::Value << c.env.num_reset_states;
  out << YAML::Key << "success_step" << YAML::Value << c.env.success_step;
  out << YAML::Key << "enable_offload" << YAML::Value << c.plan.env_offload;
  out << YAML::EndMap;
  out << YAML::Key << "algorithm" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value
      << (c.algorithm.name == Algo::Ppo ? "ppo" : "grpo");
  out << YAML::Key << "reward_type" << YAML::Value
      << level_name(c.algorithm.granularity.advantage_level);
  out << YAML::Key << "logprob_type" << YAML::Value
      << level_name(c.algorithm.granularity.logprob_level);
  out << YAML::Key << "value_type" << YAML::Value
      << level_name(c.algorithm.granularity.value_level);
  out << YAML::Key << "gamma" << YAML::Value << c.algorithm.gae.gamma;
  out << YAML::Key << "lambda" << YAML::Value << c.algorithm.gae.lambda;
  out << YAML::Key << "clip_eps" << YAML::Value << c.algorithm.clip_eps;
  out << YAML::Key << "value_loss_coef" << YAML::Value << c.algorithm.value_loss_coef;
  out << YAML::Key << "entropy_coef" << YAML::Value << c.algorithm.entropy_coef;
  out << YAML::Key << "epochs_per_batch" << YAML::Value << c.algorithm.epochs_per_batch;
  out << YAML::Key << "minibatch_size" << YAML::Value << c.algorithm.minibatch_size;
  out << YAML::Key << "learning_rate" << YAML::Value << c.algorithm.learning_rate;
  out << YAML::Key << "max_grad_norm" << YAML::Value << c.algorithm.max_grad_norm;
  out << YAML::Key << "advantage_normalization" << YAML::Value
      << c.algorithm.advantage_normalization;
  out << YAML::Key << "eps_std" << YAML::Value << c.algorithm.eps_std;
  out << YAML::Key << "filter_enabled" << YAML::Value << c.algorithm.filter_enabled;
  out << YAML::Key << "filter_bounds" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << c.algorithm.filter_bounds.lower << c.algorithm.filter_bounds.upper << YAML::EndSeq;
  out << YAML::Key << "length_normalization" << YAML::Value
      << c.algorithm.length_normalization;
  out << YAML::Key << "group_size" << YAML::Value << c.algorithm.group_size;
  out << YAML::Key << "num_groups" << YAML::Value << c.algorithm.num_groups;
  out << YAML::Key << "rollout_chunks" << YAML::Value << c.algorithm.rollout_chunks;
  out << YAML::EndMap;
  out << YAML::Key << "policy" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "hidden" << YAML::Value << c.policy.hidden;
  out << YAML::Key << "trunk_layers" << YAML::Value << c.policy.trunk_layers;
  out << YAML::Key << "value_hidden" << YAML::Value << c.policy.value_hidden;
  out << YAML::EndMap;
  out << YAML::Key << "cluster" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "num_slots" << YAML::Value << c.plan.num_slots;
  out << YAML::Key << "component_placement" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "env" << YAML::Value << c.plan.env_slots.to_string();
  out << YAML::Key << "rollout" << YAML::Value << c.plan.rollout_slots.to_string();
  out << YAML::Key << "actor" << YAML::Value << c.plan.actor_slots.to_string();
  out << YAML::EndMap << YAML::EndMap;
  out << YAML::Key << "rollout" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "pipeline_stage_num" << YAML::Value << c.plan.pipeline_stage_num;
  out << YAML::Key << "enable_offload" << YAML::Value << c.plan.rollout_offload;
  out << YAML::EndMap;
  out << YAML::Key << "actor" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enable_offload" << YAML::Value << c.plan.actor_offload;
  out << YAML::EndMap;
  out << YAML::Key << "cost_model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "preset" << YAML::Value << c.cost_preset;
  out << YAML::EndMap;
  out << YAML::Key << "bench" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "presets" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const std::string& p : c.bench.presets)
    out << p;
  out << YAML::EndSeq;
  out << YAML::Key << "plans" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const std::string& p : c.bench.plans)
    out << p;
  out << YAML::EndSeq << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string apply_overrides(const std::string& yaml_text,
                            const std::vector<std::string>& overrides) {
  if (overrides.empty())
    return yaml_text;
  YAML::Node root = YAML::Load(yaml_text);
  for (const std::string& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override needs key=value form: " + ov);
    std::string path = ov.substr(0, eq);
    std::string value = ov.substr(eq + 1);
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.'))
      parts.push_back(part);
    if (parts.empty())
      throw ConfigError("empty override key: " + ov);
    // yaml-cpp nodes share state; walking with operator[] builds the path.
    YAML::Node node = root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      YAML::Node child = node[parts[i]];
      node.reset(child);
    }
    node[parts.back()] = YAML::Load(value);
  }
  YAML::Emitter out;
  out << root;
  return std::string(out.c_str()) + "\n";
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(apply_overrides(buffer.str(), overrides));
}

std::uint64_t config_hash(const RunConfig& config) {
  std::string text = serialize_config(config);
  std::uint64_t h = 1469598103934665603ull; // FNV-1a
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace chunkrl::harness
