#include "chunkrl/placement/virtual_clock.hpp"

#include <algorithm>
#include <array>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::placement {

namespace {

// Books a task occupying every slot of `range`: it starts when both the
// task is ready and all slots are free.
double book(std::vector<double>& slot_free, const SlotRange& range, double ready,
            double duration) {
  double start = ready;
  for (int s = range.begin; s <= range.end; ++s)
    start = std::max(start, slot_free[static_cast<std::size_t>(s)]);
  double end = start + duration;
  for (int s = range.begin; s <= range.end; ++s)
    slot_free[static_cast<std::size_t>(s)] = end;
  return start;
}

} // namespace

VirtualClockBackend::VirtualClockBackend(const PlacementPlan& plan, const CostModel& cost)
    : plan_(plan), cost_(cost), mode_(derive_mode(plan)) {}

VirtualClockBackend::OffloadDecision VirtualClockBackend::plan_offloads(int num_envs) const {
  (void)num_envs;
  OffloadDecision d;
  auto slot_load = [&](int slot, bool env_res, bool gen_res, bool actor_res) {
    double load = 0.0;
    if (env_res && plan_.env_slots.contains(slot))
      load += cost_.mem_env;
    if (gen_res && plan_.rollout_slots.contains(slot))
      load += cost_.mem_gen;
    if (actor_res && plan_.actor_slots.contains(slot))
      load += cost_.mem_actor;
    return load;
  };
  auto over_capacity = [&](bool env_res, bool gen_res, bool actor_res) {
    for (int s = 0; s < plan_.num_slots; ++s)
      if (slot_load(s, env_res, gen_res, actor_res) > cost_.slot_memory + 1e-9)
        return true;
    return false;
  };

  // Rollout phase: env + gen active, actor idle.
  bool actor_overlaps = plan_.actor_slots.overlaps(plan_.env_slots) ||
                        plan_.actor_slots.overlaps(plan_.rollout_slots);
  bool actor_res = true;
  if (over_capacity(true, true, actor_res) && actor_overlaps && plan_.actor_offload) {
    d.actor_for_rollout = true;
    actor_res = false;
  }
  if (over_capacity(true, true, actor_res))
    throw MemoryOverflow("rollout residency exceeds slot memory (offload disabled?)");

  // Training phase: actor active, env + gen idle.
  bool env_res = true, gen_res = true;
  if (over_capacity(env_res, gen_res, true) &&
      plan_.env_slots.overlaps(plan_.actor_slots) && plan_.env_offload) {
    d.env_for_training = true;
    env_res = false;
  }
  if (over_capacity(env_res, gen_res, true) &&
      plan_.rollout_slots.overlaps(plan_.actor_slots) && plan_.rollout_offload) {
    d.gen_for_training = true;
    gen_res = false;
  }
  if (over_capacity(env_res, gen_res, true))
    throw MemoryOverflow("training residency exceeds slot memory (offload disabled?)");
  return d;
}

RunResult VirtualClockBackend::run_rollout_epoch(const RolloutSpec& spec,
                                                 const policy::PolicyNet& snapshot) {
  validate_plan(plan_);
  const int k = plan_.pipeline_stage_num;
  const int n = spec.env_config.num_envs;
  const int C = spec.env_config.chunk_length;
  const int T = spec.num_chunks;
  const int per_stage = n / (k > 0 ? k : 1);
  OffloadDecision offloads = plan_offloads(n);

  RunResult result;
  EpochTrace& trace = result.trace;
  std::vector<double> slot_free(static_cast<std::size_t>(plan_.num_slots), 0.0);

  // Steady-state epoch start: restore what the previous training phase
  // evicted, evict the actor if rollout needs the room.
  if (offloads.env_for_training) {
    double dur = cost_.onload_cost(true, n);
    double start = book(slot_free, plan_.env_slots, 0.0, dur);
    trace.add(plan_.env_slots, Component::Simulator, "onload", start, start + dur);
  }
  if (offloads.gen_for_training) {
    double dur = cost_.onload_cost(false, n);
    double start = book(slot_free, plan_.rollout_slots, 0.0, dur);
    trace.add(plan_.rollout_slots, Component::Generation, "onload", start, start + dur);
  }
  if (offloads.actor_for_rollout) {
    double dur = cost_.offload_cost(false, n);
    double start = book(slot_free, plan_.actor_slots, 0.0, dur);
    trace.add(plan_.actor_slots, Component::Training, "offload", start, start + dur);
  }

  // Stage task chains: RESET -> GEN(0) -> SIM(0) -> GEN(1) -> ...
  std::vector<StageSim> sims;
  sims.reserve(static_cast<std::size_t>(k));
  for (int s = 0; s < k; ++s)
    sims.emplace_back(spec, s, k);
  StageGen gen(snapshot, spec);

  const bool cross = !(plan_.env_slots == plan_.rollout_slots);
  const double handoff = cross ? cost_.t_comm : 0.0;
  const double dur_reset = cost_.reset_invocation(per_stage, plan_.env_slots.count());
  const double dur_sim = cost_.sim_invocation(per_stage, C, plan_.env_slots.count());
  const double dur_gen = cost_.gen_invocation(per_stage, plan_.rollout_slots.count());

  enum class Kind { Reset, Gen, Sim };
  struct StageState {
    Kind next = Kind::Reset;
    int t = 0; // chunk index of the next gen/sim pair
    double ready = 0.0;
    std::vector<Observation> obs;
    GenBatch pending;
    bool done = false;
  };
  std::vector<StageState> st(static_cast<std::size_t>(k));

  int remaining = k; // stages not yet done
  while (remaining > 0) {
    // Pick the schedulable task with the earliest start; ties by chunk
    // index, then kind (gen before sim), then stage id.
    int best = -1;
    double best_start = 0.0;
    auto kind_rank = [](Kind kk) { return kk == Kind::Reset ? 0 : (kk == Kind::Gen ? 1 : 2); };
    for (int s = 0; s < k; ++s) {
      StageState& stage = st[static_cast<std::size_t>(s)];
      if (stage.done)
        continue;
      const SlotRange& range =
          stage.next == Kind::Gen ? plan_.rollout_slots : plan_.env_slots;
      double start = stage.ready;
      for (int slot = range.begin; slot <= range.end; ++slot)
        start = std::max(start, slot_free[static_cast<std::size_t>(slot)]);
      bool better = false;
      if (best < 0) {
        better = true;
      } else {
        StageState& cur = st[static_cast<std::size_t>(best)];
        auto key = [&](const StageState& x, double strt) {
          return std::tuple(strt, x.t, kind_rank(x.next), &x - st.data());
        };
        better = key(stage, start) < key(cur, best_start);
      }
      if (better) {
        best = s;
        best_start = start;
      }
    }

    StageState& stage = st[static_cast<std::size_t>(best)];
    StageSim& sim = sims[static_cast<std::size_t>(best)];
    switch (stage.next) {
    case Kind::Reset: {
      double start = book(slot_free, plan_.env_slots, stage.ready, dur_reset);
      trace.add(plan_.env_slots, Component::Simulator, "reset", start, start + dur_reset);
      stage.obs = sim.initial_obs();
      stage.ready = start + dur_reset + handoff;
      stage.next = Kind::Gen;
      break;
    }
    case Kind::Gen: {
      double start = book(slot_free, plan_.rollout_slots, stage.ready, dur_gen);
      trace.add(plan_.rollout_slots, Component::Generation, "generate", start,
                start + dur_gen);
      stage.pending = gen.generate(sim.first_env_id(), stage.obs);
      stage.ready = start + dur_gen + handoff;
      stage.next = Kind::Sim;
      break;
    }
    case Kind::Sim: {
      double start = book(slot_free, plan_.env_slots, stage.ready, dur_sim);
      trace.add(plan_.env_slots, Component::Simulator, "sim_step", start, start + dur_sim);
      stage.obs = sim.execute(stage.pending);
      stage.ready = start + dur_sim + handoff;
      stage.t += 1;
      if (stage.t >= T) {
        stage.done = true;
        --remaining;
      } else {
        stage.next = Kind::Gen;
      }
      break;
    }
    }
  }

  result.slab = merge_stages(spec, sims);
  trace.frames = static_cast<std::int64_t>(n) * T * C;
  double rollout_end = 0.0;
  for (const TraceInterval& iv : trace.intervals)
    rollout_end = std::max(rollout_end, iv.t_end);
  trace.rollout_end = rollout_end;
  trace.epoch_end = rollout_end;
  return result;
}

void VirtualClockBackend::run_training_phase(EpochTrace& trace, int num_envs) const {
  OffloadDecision offloads = plan_offloads(num_envs);
  double t = trace.rollout_end; // training waits for the full batch
  std::vector<double> slot_free(static_cast<std::size_t>(plan_.num_slots), t);

  if (offloads.env_for_training) {
    double dur = cost_.offload_cost(true, num_envs);
    double start = book(slot_free, plan_.env_slots, t, dur);
    trace.add(plan_.env_slots, Component::Simulator, "offload", start, start + dur);
  }
  if (offloads.gen_for_training) {
    double dur = cost_.offload_cost(false, num_envs);
    double start = book(slot_free, plan_.rollout_slots, t, dur);
    trace.add(plan_.rollout_slots, Component::Generation, "offload", start, start + dur);
  }
  if (offloads.actor_for_rollout) {
    double dur = cost_.onload_cost(false, num_envs);
    double start = book(slot_free, plan_.actor_slots, t, dur);
    trace.add(plan_.actor_slots, Component::Training, "onload", start, start + dur);
  }

  double train_dur =
      static_cast<double>(trace.frames) * cost_.t_train_per_frame / plan_.actor_slots.count();
  if (mode_ == PlacementMode::Colocated)
    train_dur += cost_.train_comm_per_slot * plan_.actor_slots.count();
  double start = book(slot_free, plan_.actor_slots, t, train_dur);
  trace.add(plan_.actor_slots, Component::Training, "train", start, start + train_dur);
  trace.epoch_end = start + train_dur;
}

RunResult VirtualClockBackend::run_epoch(const RolloutSpec& spec,
                                         const policy::PolicyNet& snapshot) {
  RunResult result = run_rollout_epoch(spec, snapshot);
  run_training_phase(result.trace, spec.env_config.num_envs);
  return result;
}

} // namespace chunkrl::placement
