#include "chunkrl/placement/cost_model.hpp"

#include "chunkrl/core/errors.hpp"

namespace chunkrl::placement {

CostModel CostModel::preset(const std::string& name) {
  CostModel m;
  if (name == "1to1") {
    // Matched per-chunk work (C=4 below: 4 * 0.01 = t_gen), nonzero offload
    // traffic, training comparable to rollout.
    m.t_sim_step = 0.01;
    m.t_gen = 0.04;
    m.t_sim_fixed = 0.05;
    m.t_gen_fixed = 0.05;
    m.t_train_per_frame = 0.05;
    m.t_offload = 3.6;
    m.t_onload = 3.6;
    m.t_env_state_per_env = 0.02;
    m.t_comm = 0.05;
    m.train_comm_per_slot = 0.05;
  } else if (name == "15to1") {
    // Simulation dominates generation ~15:1 per chunk; sizeable per-call
    // simulator overhead, so splitting into sub-simulators buys little.
    m.t_sim_step = 0.15;
    m.t_gen = 0.04;
    m.t_sim_fixed = 1.2;
    m.t_gen_fixed = 0.1;
    m.t_train_per_frame = 0.05;
    m.t_offload = 3.6;
    m.t_onload = 3.6;
    m.t_env_state_per_env = 0.02;
    m.t_comm = 0.05;
    m.train_comm_per_slot = 0.05;
  } else {
    throw ConfigError("unknown cost model preset: " + name);
  }
  return m;
}

} // namespace chunkrl::placement
