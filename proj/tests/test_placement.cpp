#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "chunkrl/core/errors.hpp"
#include "chunkrl/harness/oracle.hpp"
#include "chunkrl/placement/real_backend.hpp"
#include "chunkrl/placement/virtual_clock.hpp"

using namespace chunkrl;
using namespace chunkrl::placement;

namespace {

PlacementPlan table_plan(const std::string& env, const std::string& rollout,
                         const std::string& actor, int slots = 8) {
  PlacementPlan plan;
  plan.num_slots = slots;
  plan.env_slots = SlotRange::parse(env);
  plan.rollout_slots = SlotRange::parse(rollout);
  plan.actor_slots = SlotRange::parse(actor);
  return plan;
}

RolloutSpec small_spec(std::uint64_t seed = 3) {
  RolloutSpec spec;
  spec.env_config.kind = envsim::EnvKind::ToyReach;
  spec.env_config.num_envs = 8;
  spec.env_config.chunk_length = 4;
  spec.env_config.max_episode_steps = 24;
  spec.env_config.auto_reset = true;
  spec.env_config.seed = seed;
  spec.num_chunks = 6;
  spec.sample_seed = mix_seed(seed, 1);
  return spec;
}

policy::PolicyNet small_net(std::uint64_t seed = 3) {
  policy::PolicyDescriptor desc;
  desc.obs_dim = 6;
  desc.hidden = 8;
  desc.trunk_layers = 1;
  desc.value_hidden = 4;
  desc.vocab = 4;
  desc.C = 4;
  desc.M = 2;
  policy::PolicyNet net = policy::PolicyNet::initialized(desc, seed);
  std::vector<double> p = net.params();
  Rng rng(mix_seed(seed, 2));
  for (double& x : p)
    x += 0.2 * rng.next_normal();
  net.set_params(std::move(p));
  return net;
}

} // namespace

TEST_CASE("slot range parsing") {
  SlotRange r = SlotRange::parse("0-7");
  CHECK(r.begin == 0);
  CHECK(r.end == 7);
  CHECK(r.count() == 8);
  CHECK(SlotRange::parse("3").count() == 1);
  CHECK(r.to_string() == "0-7");
  CHECK_THROWS_AS(SlotRange::parse("7-0"), InvalidPlan);
  CHECK_THROWS_AS(SlotRange::parse("x"), InvalidPlan);
}

TEST_CASE("mode derivation from slot ranges") {
  CHECK(derive_mode(table_plan("0-7", "0-7", "0-7")) == PlacementMode::Colocated);
  CHECK(derive_mode(table_plan("0-1", "2-3", "4-7")) == PlacementMode::Disaggregated);
  CHECK(derive_mode(table_plan("0-3", "4-7", "0-7")) == PlacementMode::Hybrid);
  CHECK_THROWS_AS(derive_mode(table_plan("0-8", "0-7", "0-7")), InvalidPlan);
}

TEST_CASE("virtual-clock makespan matches the hand-derived schedules") {
  harness::OracleReport report = harness::oracle_makespan();
  for (const std::string& line : report.lines)
    INFO(line);
  CHECK(report.passed());
}

TEST_CASE("trace validation and throughput basics") {
  CostModel cost = CostModel::preset("1to1");
  PlacementPlan plan = table_plan("0-3", "4-7", "0-7");
  plan.env_offload = plan.rollout_offload = plan.actor_offload = true;
  VirtualClockBackend backend(plan, cost);
  RunResult run = backend.run_epoch(small_spec(), small_net());
  CHECK_NOTHROW(validate_trace(run.trace));
  CHECK(run.trace.frames == 8 * 6 * 4);
  double tp = throughput(run.trace);
  CHECK(tp > 0.0);

  // doubling every cost halves throughput
  CostModel doubled = cost;
  doubled.t_sim_step *= 2;
  doubled.t_gen *= 2;
  doubled.t_sim_fixed *= 2;
  doubled.t_gen_fixed *= 2;
  doubled.t_train_per_frame *= 2;
  doubled.t_offload *= 2;
  doubled.t_onload *= 2;
  doubled.t_env_state_per_env *= 2;
  doubled.t_comm *= 2;
  doubled.train_comm_per_slot *= 2;
  VirtualClockBackend backend2(plan, doubled);
  RunResult run2 = backend2.run_epoch(small_spec(), small_net());
  CHECK(throughput(run2.trace) == doctest::Approx(tp / 2.0).epsilon(1e-9));

  EpochTrace empty;
  CHECK_THROWS_AS(throughput(empty), EmptyTrace);
}

TEST_CASE("hand-computed throughput on a three-step scenario") {
  // 1 env, C=1, 3 chunks; sim = gen = 1.0 per invocation on a single slot;
  // all components on slot 0 (colocated), memory fits, no offload, no
  // training cost beyond t_train_per_frame = 2.0 per frame on 1 slot.
  CostModel cost;
  cost.t_sim_step = 1.0;
  cost.t_gen = 1.0;
  cost.t_sim_fixed = cost.t_gen_fixed = 0.0;
  cost.t_comm = 0.0;
  cost.t_offload = cost.t_onload = 0.0;
  cost.t_env_state_per_env = 0.0;
  cost.t_train_per_frame = 2.0;
  cost.train_comm_per_slot = 0.0;
  cost.mem_env = cost.mem_gen = cost.mem_actor = 0.1;

  PlacementPlan plan = table_plan("0", "0", "0", 1);
  RolloutSpec spec = small_spec();
  spec.env_config.num_envs = 1;
  spec.env_config.chunk_length = 1;
  spec.num_chunks = 3;

  policy::PolicyDescriptor desc;
  desc.obs_dim = 6;
  desc.hidden = 4;
  desc.trunk_layers = 1;
  desc.value_hidden = 4;
  desc.vocab = 4;
  desc.C = 1;
  desc.M = 2;
  policy::PolicyNet net(desc);

  VirtualClockBackend backend(plan, cost);
  RunResult run = backend.run_epoch(spec, net);
  // reset(1) + 3*(gen 1 + sim 1) = 7 rollout; training 3 frames * 2 = 6
  CHECK(run.trace.rollout_end == doctest::Approx(7.0));
  CHECK(run.trace.epoch_end == doctest::Approx(13.0));
  CHECK(throughput(run.trace) == doctest::Approx(3.0 / 13.0).epsilon(1e-12));
}

TEST_CASE("memory overflow when colocated without offload") {
  CostModel cost = CostModel::preset("1to1"); // footprints 0.5 each, capacity 1.0
  PlacementPlan plan = table_plan("0-7", "0-7", "0-7");
  plan.env_offload = plan.rollout_offload = plan.actor_offload = false;
  VirtualClockBackend backend(plan, cost);
  CHECK_THROWS_AS(backend.run_rollout_epoch(small_spec(), small_net()), MemoryOverflow);
}

TEST_CASE("hybrid charges one offload+onload pair per component per epoch") {
  CostModel cost = CostModel::preset("1to1");
  PlacementPlan plan = table_plan("0-3", "4-7", "0-7");
  plan.env_offload = plan.rollout_offload = plan.actor_offload = true;
  VirtualClockBackend backend(plan, cost);
  RunResult run = backend.run_epoch(small_spec(), small_net());
  std::map<std::pair<Component, std::string>, int> events;
  for (const TraceInterval& iv : run.trace.intervals)
    if (iv.activity == "offload" || iv.activity == "onload")
      events[{iv.component, iv.activity}]++;
  // intervals are per slot: env/gen spans 4 slots, actor 8
  CHECK(events[{Component::Simulator, "offload"}] == 4);
  CHECK(events[{Component::Simulator, "onload"}] == 4);
  CHECK(events[{Component::Generation, "offload"}] == 4);
  CHECK(events[{Component::Generation, "onload"}] == 4);
  CHECK(events[{Component::Training, "offload"}] == 8);
  CHECK(events[{Component::Training, "onload"}] == 8);
}

TEST_CASE("disaggregated training takes twice as long as hybrid on the same frames") {
  CostModel cost = CostModel::preset("1to1");
  cost.t_offload = cost.t_onload = 0.0; // isolate the training term
  cost.t_env_state_per_env = 0.0;
  cost.train_comm_per_slot = 0.0;

  RolloutSpec spec = small_spec();
  policy::PolicyNet net = small_net();

  PlacementPlan disagg = table_plan("0-1", "2-3", "4-7");
  VirtualClockBackend b1(disagg, cost);
  RunResult r1 = b1.run_epoch(spec, net);
  double train_disagg = r1.trace.epoch_end - r1.trace.rollout_end;

  PlacementPlan hybrid = table_plan("0-3", "4-7", "0-7");
  hybrid.env_offload = hybrid.rollout_offload = hybrid.actor_offload = true;
  VirtualClockBackend b2(hybrid, cost);
  RunResult r2 = b2.run_epoch(spec, net);
  double train_hybrid = r2.trace.epoch_end - r2.trace.rollout_end;

  CHECK(train_disagg == doctest::Approx(2.0 * train_hybrid).epsilon(1e-9));
}

TEST_CASE("scheduling invariance: slabs identical across modes, k and backends") {
  RolloutSpec spec = small_spec(17);
  policy::PolicyNet net = small_net(17);

  PlacementPlan colocated = table_plan("0-7", "0-7", "0-7");
  colocated.env_offload = colocated.rollout_offload = colocated.actor_offload = true;
  PlacementPlan disagg = table_plan("0-1", "2-3", "4-7");
  PlacementPlan hybrid = table_plan("0-3", "4-7", "0-7");
  hybrid.env_offload = hybrid.rollout_offload = hybrid.actor_offload = true;

  CostModel cost = CostModel::preset("1to1");
  TrajectorySlab reference;
  bool have_reference = false;
  for (PlacementPlan plan : {colocated, disagg, hybrid}) {
    for (int k : {1, 2}) {
      plan.pipeline_stage_num = k;
      VirtualClockBackend backend(plan, cost);
      TrajectorySlab slab = backend.run_rollout_epoch(spec, net).slab;
      if (!have_reference) {
        reference = slab;
        have_reference = true;
      } else {
        CHECK(slab == reference);
      }
      RealBackend real(plan);
      TrajectorySlab real_slab = real.run_rollout_epoch(spec, net).slab;
      CHECK(real_slab == reference);
    }
  }
}

TEST_CASE("virtual clock is deterministic run-to-run") {
  RolloutSpec spec = small_spec(23);
  policy::PolicyNet net = small_net(23);
  PlacementPlan plan = table_plan("0-3", "4-7", "0-7");
  plan.pipeline_stage_num = 2;
  plan.env_offload = plan.rollout_offload = plan.actor_offload = true;
  CostModel cost = CostModel::preset("1to1");

  VirtualClockBackend a(plan, cost), b(plan, cost);
  RunResult ra = a.run_epoch(spec, net);
  RunResult rb = b.run_epoch(spec, net);
  CHECK(ra.slab == rb.slab);
  REQUIRE(ra.trace.intervals.size() == rb.trace.intervals.size());
  for (std::size_t i = 0; i < ra.trace.intervals.size(); ++i) {
    CHECK(ra.trace.intervals[i].t_start == rb.trace.intervals[i].t_start);
    CHECK(ra.trace.intervals[i].t_end == rb.trace.intervals[i].t_end);
  }
}

TEST_CASE("rollout makespan is non-increasing in k under zero fixed costs") {
  CostModel cost;
  cost.t_sim_step = 0.02;
  cost.t_gen = 0.08;
  cost.t_sim_fixed = cost.t_gen_fixed = 0.0;
  cost.t_comm = 0.0;
  cost.t_offload = cost.t_onload = 0.0;
  cost.mem_env = cost.mem_gen = cost.mem_actor = 0.2;

  RolloutSpec spec = small_spec(29);
  policy::PolicyNet net = small_net(29);
  PlacementPlan plan = table_plan("0-3", "4-7", "0-7");

  double prev = 1e300;
  for (int k : {1, 2, 4}) {
    plan.pipeline_stage_num = k;
    VirtualClockBackend backend(plan, cost);
    double makespan = backend.run_rollout_epoch(spec, net).trace.rollout_end;
    CHECK(makespan <= prev + 1e-9);
    prev = makespan;
  }
}

TEST_CASE("real backend message logs respect the dependency DAG") {
  RolloutSpec spec = small_spec(31);
  policy::PolicyNet net = small_net(31);
  PlacementPlan plan = table_plan("0-3", "4-7", "0-7");
  plan.pipeline_stage_num = 2;
  RealBackend backend(plan);
  RealRunResult run = backend.run_rollout_epoch(spec, net);

  // per stage: send_obs(t) precedes recv_act(t) precedes send_obs(t+1)
  std::map<int, int> last_obs_sent, last_act_recv;
  for (const MessageLogEntry& e : run.sim_log) {
    if (e.event == "send_obs") {
      CHECK(e.t == (last_obs_sent.count(e.stage) ? last_obs_sent[e.stage] + 1 : 0));
      if (e.t > 0)
        CHECK(last_act_recv[e.stage] == e.t - 1); // executed before sending next
      last_obs_sent[e.stage] = e.t;
    } else if (e.event == "recv_act") {
      CHECK(e.t == (last_act_recv.count(e.stage) ? last_act_recv[e.stage] + 1 : 0));
      CHECK(last_obs_sent[e.stage] == e.t); // obs for t was sent before act t returns
      last_act_recv[e.stage] = e.t;
    }
  }
  // generation worker: recv_obs(t) precedes send_act(t), t increments per stage
  std::map<int, int> gen_next_t;
  std::map<int, bool> gen_send_pending;
  for (const MessageLogEntry& e : run.gen_log) {
    if (e.event == "recv_obs") {
      CHECK_FALSE(gen_send_pending[e.stage]);
      CHECK(e.t == gen_next_t[e.stage]);
      gen_send_pending[e.stage] = true;
    } else if (e.event == "send_act") {
      CHECK(gen_send_pending[e.stage]);
      CHECK(e.t == gen_next_t[e.stage]);
      gen_send_pending[e.stage] = false;
      gen_next_t[e.stage] = e.t + 1;
    }
  }
}

TEST_CASE("k must divide the env batch") {
  RolloutSpec spec = small_spec();
  spec.env_config.num_envs = 6;
  PlacementPlan plan = table_plan("0-3", "4-7", "0-7");
  plan.env_offload = plan.rollout_offload = plan.actor_offload = true;
  plan.pipeline_stage_num = 4; // 6 % 4 != 0
  VirtualClockBackend backend(plan, CostModel::preset("1to1"));
  CHECK_THROWS_AS(backend.run_rollout_epoch(spec, small_net()), ConfigError);
}

TEST_CASE("trace export emits one line per interval") {
  EpochTrace trace;
  trace.add(SlotRange{0, 1}, Component::Simulator, "sim_step", 0.0, 1.0);
  trace.frames = 4;
  trace.epoch_end = 1.0;
  std::string text = export_trace(trace);
  int lines = 0;
  for (char c : text)
    lines += c == '\n';
  CHECK(lines == 2);
  CHECK(text.find("\"slot\":0") != std::string::npos);
  CHECK(text.find("\"activity\":\"sim_step\"") != std::string::npos);
}
