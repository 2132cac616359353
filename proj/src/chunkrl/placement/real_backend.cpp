#include "chunkrl/placement/real_backend.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <queue>
#include <thread>

namespace chunkrl::placement {

namespace {

template <typename T>
class Channel {
public:
  void send(T msg) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      queue_.push(std::move(msg));
    }
    cv_.notify_one();
  }

  T recv() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    T msg = std::move(queue_.front());
    queue_.pop();
    return msg;
  }

private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::queue<T> queue_;
};

struct ObsMsg {
  int stage = 0;
  int t = 0; // chunk index the observations feed
  std::vector<Observation> obs;
};

struct ActMsg {
  int stage = 0;
  int t = 0;
  GenBatch batch;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

} // namespace

RealRunResult RealBackend::run_rollout_epoch(const RolloutSpec& spec,
                                             const policy::PolicyNet& snapshot) {
  const int k = plan_.pipeline_stage_num;
  const int T = spec.num_chunks;
  RealRunResult result;

  Channel<ObsMsg> obs_channel;
  Channel<ActMsg> act_channel;
  Clock::time_point t0 = Clock::now();

  std::vector<StageSim> sims;
  sims.reserve(static_cast<std::size_t>(k));
  for (int s = 0; s < k; ++s)
    sims.emplace_back(spec, s, k);

  // Each worker records into its own buffers; everything is merged after
  // the join so the workers share nothing mutable but the channels.
  EpochTrace sim_trace, gen_trace;

  std::thread sim_worker([&] {
    for (int s = 0; s < k; ++s) {
      double a = seconds_since(t0);
      std::vector<Observation> obs = sims[static_cast<std::size_t>(s)].initial_obs();
      sim_trace.add(plan_.env_slots, Component::Simulator, "reset", a, seconds_since(t0));
      result.sim_log.push_back({"send_obs", s, 0});
      obs_channel.send(ObsMsg{s, 0, std::move(obs)});
    }
    int done = 0;
    while (done < k) {
      ActMsg act = act_channel.recv();
      result.sim_log.push_back({"recv_act", act.stage, act.t});
      double a = seconds_since(t0);
      std::vector<Observation> next =
          sims[static_cast<std::size_t>(act.stage)].execute(act.batch);
      sim_trace.add(plan_.env_slots, Component::Simulator, "sim_step", a,
                    seconds_since(t0));
      if (act.t + 1 < T) {
        result.sim_log.push_back({"send_obs", act.stage, act.t + 1});
        obs_channel.send(ObsMsg{act.stage, act.t + 1, std::move(next)});
      } else {
        ++done;
      }
    }
  });

  std::thread gen_worker([&] {
    StageGen gen(snapshot, spec);
    std::vector<int> first_env(static_cast<std::size_t>(k), 0);
    for (int s = 0; s < k; ++s)
      first_env[static_cast<std::size_t>(s)] = sims[static_cast<std::size_t>(s)].first_env_id();
    std::int64_t expected = static_cast<std::int64_t>(k) * T;
    for (std::int64_t i = 0; i < expected; ++i) {
      ObsMsg obs = obs_channel.recv();
      result.gen_log.push_back({"recv_obs", obs.stage, obs.t});
      double a = seconds_since(t0);
      GenBatch batch = gen.generate(first_env[static_cast<std::size_t>(obs.stage)], obs.obs);
      gen_trace.add(plan_.rollout_slots, Component::Generation, "generate", a,
                    seconds_since(t0));
      result.gen_log.push_back({"send_act", obs.stage, obs.t});
      act_channel.send(ActMsg{obs.stage, obs.t, std::move(batch)});
    }
  });

  sim_worker.join();
  gen_worker.join();

  result.trace.intervals = std::move(sim_trace.intervals);
  result.trace.intervals.insert(result.trace.intervals.end(), gen_trace.intervals.begin(),
                                gen_trace.intervals.end());

  result.slab = merge_stages(spec, sims);
  result.trace.frames = static_cast<std::int64_t>(spec.env_config.num_envs) * T *
                        spec.env_config.chunk_length;
  double end = 0.0;
  for (const TraceInterval& iv : result.trace.intervals)
    end = std::max(end, iv.t_end);
  result.trace.rollout_end = end;
  result.trace.epoch_end = end;
  return result;
}

} // namespace chunkrl::placement
