#pragma once

#include <string>

namespace chunkrl::placement {

/// Per-event durations for the virtual clock, in abstract time units.
/// Work terms scale with envs and invert with slot count; fixed terms are
/// charged per invocation (they are what makes deep pipelines lose when
/// simulation dominates generation).
struct CostModel {
  double t_sim_step = 0.01;        // slot-time per env per atomic step
  double t_gen = 0.04;             // slot-time per env per chunk generation
  double t_sim_fixed = 0.0;        // per simulator invocation
  double t_gen_fixed = 0.0;        // per generation invocation
  double t_train_per_frame = 0.02; // slot-time per frame trained
  double t_offload = 1.0;          // per component offload event
  double t_onload = 1.0;           // per component onload event
  double t_env_state_per_env = 0.0; // extra simulator state save/restore, per env
  double t_comm = 0.05;            // latency per cross-partition handoff
  double train_comm_per_slot = 0.0; // colocated-training overhead, linear in slots
  double mem_env = 0.5;            // footprints, fraction of slot_memory units
  double mem_gen = 0.5;            // env+gen split a slot evenly when colocated
  double mem_actor = 0.6;          // training state outgrows half a slot
  double slot_memory = 1.0;

  double sim_invocation(int envs, int chunk_len, int slots) const {
    return t_sim_fixed + t_sim_step * chunk_len * envs / slots;
  }
  double reset_invocation(int envs, int slots) const {
    return t_sim_fixed + t_sim_step * envs / slots;
  }
  double gen_invocation(int envs, int slots) const {
    return t_gen_fixed + t_gen * envs / slots;
  }
  double offload_cost(bool is_env, int envs) const {
    return t_offload + (is_env ? t_env_state_per_env * envs : 0.0);
  }
  double onload_cost(bool is_env, int envs) const {
    return t_onload + (is_env ? t_env_state_per_env * envs : 0.0);
  }

  /// Named presets used by the benchmark suite. "1to1" has matched
  /// simulation and generation cost per chunk; "15to1" makes simulation
  /// dominate 15:1, reflecting chunked inference against sequential
  /// execution.
  static CostModel preset(const std::string& name);
};

} // namespace chunkrl::placement
