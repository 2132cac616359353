#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chunkrl/core/errors.hpp"
#include "chunkrl/core/rng.hpp"
#include "chunkrl/envsim/vec_env.hpp"

using namespace chunkrl;
using namespace chunkrl::envsim;

namespace {

VecEnvConfig toy_config() {
  VecEnvConfig cfg;
  cfg.kind = EnvKind::ToyReach;
  cfg.num_envs = 4;
  cfg.max_episode_steps = 20;
  cfg.chunk_length = 4;
  cfg.grid_size = 5;
  cfg.seed = 11;
  return cfg;
}

TokenAction act(int axis, int move) { return TokenAction{{axis, move}}; }

ActionChunk chunk_of(std::initializer_list<TokenAction> actions) {
  ActionChunk c;
  c.actions = actions;
  return c;
}

// Random token stream shared by equivalence checks.
std::vector<ActionChunk> random_chunks(Rng& rng, int n, int C) {
  std::vector<ActionChunk> chunks(static_cast<std::size_t>(n));
  for (auto& ch : chunks) {
    ch.actions.resize(static_cast<std::size_t>(C));
    for (auto& a : ch.actions)
      a.tokens = {static_cast<int>(rng.next_below(4)), static_cast<int>(rng.next_below(4))};
  }
  return chunks;
}

} // namespace

TEST_CASE("fixed reset ids give identical observations across envs") {
  VecEnvConfig cfg = toy_config();
  cfg.use_fixed_reset_state_ids = true;
  VecEnv env(cfg);
  std::vector<int> ids{7, 7, 7, 7};
  auto obs = env.reset_all(&ids);
  REQUIRE(obs.size() == 4);
  for (int i = 1; i < 4; ++i)
    CHECK(obs[static_cast<std::size_t>(i)] == obs[0]);
}

TEST_CASE("random resets are reproducible across runs") {
  VecEnvConfig cfg = toy_config();
  VecEnv a(cfg), b(cfg);
  CHECK(a.reset_all() == b.reset_all());
}

TEST_CASE("resetting a subset leaves other envs untouched") {
  VecEnvConfig cfg = toy_config();
  cfg.use_fixed_reset_state_ids = true;
  VecEnv env(cfg);
  std::vector<int> ids{1, 2, 3, 4};
  env.reset_all(&ids);
  auto before0 = env.current_obs(0);
  auto before2 = env.current_obs(2);
  std::vector<int> id0{0};
  env.reset({2}, &id0);
  CHECK(env.current_obs(0) == before0);
  CHECK(env.current_obs(2) != before2);
}

TEST_CASE("bad reset id is rejected") {
  VecEnvConfig cfg = toy_config();
  cfg.use_fixed_reset_state_ids = true;
  VecEnv env(cfg);
  std::vector<int> ids{64, 0, 0, 0}; // table size is 64
  CHECK_THROWS_AS(env.reset_all(&ids), BadResetId);
}

TEST_CASE("fresh env no-op action gives zero reward and no flags") {
  VecEnvConfig cfg = toy_config();
  cfg.num_envs = 1;
  VecEnv env(cfg);
  env.reset_all();
  // move token 1 decodes to delta 0
  auto res = env.step({act(0, 1)});
  CHECK(res.reward[0] == 0.0);
  CHECK_FALSE(res.terminated[0]);
  CHECK_FALSE(res.truncated[0]);
  CHECK(res.valid[0]);
}

TEST_CASE("scripted env under ignore_terminations only truncates") {
  VecEnvConfig cfg = toy_config();
  cfg.kind = EnvKind::Scripted;
  cfg.num_envs = 1;
  cfg.success_step = 3;
  cfg.max_episode_steps = 6;
  cfg.ignore_terminations = true;
  cfg.auto_reset = false;
  VecEnv env(cfg);
  env.reset_all();
  for (int t = 0; t < 6; ++t) {
    auto res = env.step({act(0, 1)});
    CHECK_FALSE(res.terminated[0]);
    CHECK(res.truncated[0] == (t == 5));
    if (t == 2)
      CHECK(res.reward[0] == 1.0); // success reward still paid
  }
  auto table = env.episode_table();
  REQUIRE(table.size() == 1);
  CHECK(table[0].success);
  CHECK(table[0].first_success_step == 2);
  CHECK(table[0].ended_by_truncation);
}

TEST_CASE("auto_reset returns the post-reset observation and final_obs") {
  VecEnvConfig cfg = toy_config();
  cfg.kind = EnvKind::Scripted;
  cfg.num_envs = 1;
  cfg.success_step = 2;
  cfg.auto_reset = true;
  VecEnv env(cfg);
  env.reset_all();
  env.step({act(0, 1)});
  auto res = env.step({act(0, 1)}); // success -> terminated -> reset inside
  CHECK(res.terminated[0]);
  REQUIRE(res.final_obs[0].has_value());
  // post-reset obs restarts the episode clock
  CHECK(res.obs[0][0] == 0.0);
  CHECK((*res.final_obs[0])[0] == doctest::Approx(2.0 / cfg.max_episode_steps));
}

TEST_CASE("deferred chunk_step freezes a finished sub-env") {
  VecEnvConfig cfg = toy_config();
  cfg.kind = EnvKind::Scripted;
  cfg.num_envs = 1;
  cfg.success_step = 2;
  cfg.auto_reset = true;
  VecEnv env(cfg);
  env.reset_all();
  auto results = env.chunk_step({chunk_of({act(0, 1), act(0, 1), act(0, 1), act(0, 1)})},
                                ResetMode::Deferred);
  const ChunkResult& r = results[0];
  CHECK(r.rewards == std::vector<double>{0.0, 1.0, 0.0, 0.0});
  CHECK(r.valid == std::vector<bool>{true, true, false, false});
  // flags stay latched on the frozen tail
  CHECK(r.terminated == std::vector<bool>{false, true, true, true});
  CHECK(r.episode_uid[2] == -1);
  CHECK(env.completed_episode_count(0) == 1);
}

TEST_CASE("immediate chunk_step resets mid-chunk and continues") {
  VecEnvConfig cfg = toy_config();
  cfg.kind = EnvKind::Scripted;
  cfg.num_envs = 1;
  cfg.success_step = 2;
  cfg.auto_reset = true;
  VecEnv env(cfg);
  env.reset_all();
  auto results = env.chunk_step({chunk_of({act(0, 1), act(0, 1), act(0, 1), act(0, 1)})},
                                ResetMode::Immediate);
  const ChunkResult& r = results[0];
  CHECK(r.rewards == std::vector<double>{0.0, 1.0, 0.0, 1.0});
  CHECK(r.valid == std::vector<bool>{true, true, true, true});
  CHECK(r.episode_uid[1] != r.episode_uid[2]); // fresh episode id after reset
  CHECK(env.completed_episode_count(0) == 2);
}

TEST_CASE("all-fail chunk equals four sequential step calls") {
  VecEnvConfig cfg = toy_config();
  cfg.num_envs = 2;
  cfg.ignore_terminations = true; // no done events in the window
  Rng rng(3);
  auto chunks = random_chunks(rng, 2, cfg.chunk_length);

  VecEnv chunked(cfg), stepped(cfg);
  chunked.reset_all();
  stepped.reset_all();
  auto results = chunked.chunk_step(chunks, ResetMode::Deferred);
  for (int j = 0; j < cfg.chunk_length; ++j) {
    std::vector<TokenAction> acts;
    for (auto& ch : chunks)
      acts.push_back(ch.actions[static_cast<std::size_t>(j)]);
    auto sr = stepped.step(acts);
    for (int e = 0; e < cfg.num_envs; ++e) {
      CHECK(results[static_cast<std::size_t>(e)].rewards[static_cast<std::size_t>(j)] ==
            sr.reward[static_cast<std::size_t>(e)]);
      CHECK(results[static_cast<std::size_t>(e)].post_obs[static_cast<std::size_t>(j)] ==
            sr.obs[static_cast<std::size_t>(e)]);
      CHECK(results[static_cast<std::size_t>(e)].terminated[static_cast<std::size_t>(j)] ==
            sr.terminated[static_cast<std::size_t>(e)]);
      CHECK(results[static_cast<std::size_t>(e)].truncated[static_cast<std::size_t>(j)] ==
            sr.truncated[static_cast<std::size_t>(e)]);
    }
  }
}

TEST_CASE("chunk_step equivalence oracle over 200 random seeds") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    VecEnvConfig cfg = toy_config();
    cfg.num_envs = 2;
    cfg.seed = seed;
    cfg.ignore_terminations = true; // deferred mode + no terminations
    cfg.max_episode_steps = 1000;   // no truncation inside the window
    Rng rng(mix_seed(seed, 99));
    auto chunks = random_chunks(rng, 2, cfg.chunk_length);

    VecEnv chunked(cfg), stepped(cfg);
    chunked.reset_all();
    stepped.reset_all();
    auto results = chunked.chunk_step(chunks, ResetMode::Deferred);
    bool all_equal = true;
    for (int j = 0; j < cfg.chunk_length; ++j) {
      std::vector<TokenAction> acts;
      for (auto& ch : chunks)
        acts.push_back(ch.actions[static_cast<std::size_t>(j)]);
      auto sr = stepped.step(acts);
      for (int e = 0; e < cfg.num_envs; ++e) {
        all_equal =
            all_equal &&
            results[static_cast<std::size_t>(e)].rewards[static_cast<std::size_t>(j)] ==
                sr.reward[static_cast<std::size_t>(e)] &&
            results[static_cast<std::size_t>(e)].post_obs[static_cast<std::size_t>(j)] ==
                sr.obs[static_cast<std::size_t>(e)];
      }
    }
    CHECK(all_equal);
  }
}

TEST_CASE("episode-count property: partial reset vs fixed length") {
  const int s = 5, T = 40;
  VecEnvConfig cfg = toy_config();
  cfg.kind = EnvKind::Scripted;
  cfg.num_envs = 2;
  cfg.success_step = s;
  cfg.max_episode_steps = T;

  SUBCASE("fixed length: one episode per env") {
    cfg.ignore_terminations = true;
    cfg.auto_reset = true;
    VecEnv env(cfg);
    env.reset_all();
    Rng rng(1);
    for (int t = 0; t < T / cfg.chunk_length; ++t)
      env.chunk_step(random_chunks(rng, 2, cfg.chunk_length), ResetMode::Immediate);
    CHECK(env.completed_episode_count(0) == 1);
    CHECK(env.completed_episode_count(1) == 1);
  }
  SUBCASE("partial reset: floor(T/s) episodes per env") {
    cfg.ignore_terminations = false;
    cfg.auto_reset = true;
    VecEnv env(cfg);
    env.reset_all();
    Rng rng(1);
    for (int t = 0; t < T / cfg.chunk_length; ++t)
      env.chunk_step(random_chunks(rng, 2, cfg.chunk_length), ResetMode::Immediate);
    CHECK(env.completed_episode_count(0) == T / s);
    CHECK(env.completed_episode_count(1) == T / s);
  }
}

TEST_CASE("determinism across partitionings") {
  VecEnvConfig cfg = toy_config();
  cfg.num_envs = 4;
  Rng rng(5);
  auto chunks = random_chunks(rng, 4, cfg.chunk_length);

  VecEnv whole(cfg);
  whole.reset_all();
  auto full = whole.chunk_step(chunks, ResetMode::Immediate);

  auto parts = VecEnv::make_partitions(cfg, 2);
  parts[0]->reset_all();
  parts[1]->reset_all();
  std::vector<ActionChunk> first(chunks.begin(), chunks.begin() + 2);
  std::vector<ActionChunk> second(chunks.begin() + 2, chunks.end());
  auto r0 = parts[0]->chunk_step(first, ResetMode::Immediate);
  auto r1 = parts[1]->chunk_step(second, ResetMode::Immediate);

  for (int e = 0; e < 2; ++e) {
    CHECK(full[static_cast<std::size_t>(e)].rewards == r0[static_cast<std::size_t>(e)].rewards);
    CHECK(full[static_cast<std::size_t>(e)].next_obs ==
          r0[static_cast<std::size_t>(e)].next_obs);
    CHECK(full[static_cast<std::size_t>(e + 2)].rewards ==
          r1[static_cast<std::size_t>(e)].rewards);
    CHECK(full[static_cast<std::size_t>(e + 2)].next_obs ==
          r1[static_cast<std::size_t>(e)].next_obs);
  }
}

TEST_CASE("toy reach reward is paid while sitting on the target") {
  VecEnvConfig cfg = toy_config();
  cfg.num_envs = 1;
  cfg.ignore_terminations = true;
  cfg.use_fixed_reset_state_ids = true;
  VecEnv env(cfg);
  // Find a layout where the target is one step right of the agent.
  int chosen = -1;
  for (int id = 0; id < cfg.num_reset_states; ++id) {
    std::vector<int> ids{id};
    auto obs = env.reset({0}, &ids);
    double dx = obs[0][4], dy = obs[0][5];
    if (dx == doctest::Approx(1.0 / (cfg.grid_size - 1)) && dy == 0.0) {
      chosen = id;
      break;
    }
  }
  REQUIRE(chosen >= 0);
  auto res = env.step({act(0, 2)}); // move +x onto the target
  CHECK(res.reward[0] == 1.0);
  auto res2 = env.step({act(0, 1)}); // stay put: still on target
  CHECK(res2.reward[0] == 1.0);
}

TEST_CASE("slab dump has one row per atomic step") {
  TrajectorySlab slab;
  slab.num_envs = 1;
  slab.chunk_length = 2;
  slab.tokens_per_action = 2;
  StepRecord rec;
  rec.obs = {0.0};
  rec.chunk = chunk_of({act(0, 1), act(1, 2)});
  rec.chunk.actions.resize(2);
  rec.token_logprobs = TokenLogprobs{2, 2, {0, 0, 0, 0}};
  rec.rewards = {0.0, 1.0};
  rec.terminated = {false, true};
  rec.truncated = {false, false};
  rec.valid = {true, true};
  rec.episode_uid = {0, 0};
  rec.post_obs = {{0.0}, {0.0}};
  rec.value_vector = {0.0, 0.0};
  slab.records.push_back({rec});
  std::string dump = dump_slab(slab);
  int rows = 0;
  for (char c : dump)
    rows += c == '\n';
  CHECK(rows == 3); // header + 2 atomic steps
}
