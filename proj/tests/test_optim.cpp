#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chunkrl/core/errors.hpp"
#include "chunkrl/harness/oracle.hpp"
#include "chunkrl/optim/losses.hpp"
#include "chunkrl/optim/update.hpp"

using namespace chunkrl;
using namespace chunkrl::optim;
using namespace chunkrl::advantage;

namespace {

policy::PolicyDescriptor tiny_desc() {
  policy::PolicyDescriptor d;
  d.obs_dim = 2;
  d.hidden = 6;
  d.trunk_layers = 1;
  d.value_hidden = 4;
  d.vocab = 3;
  d.C = 2;
  d.M = 2;
  return d;
}

struct Fixture {
  policy::PolicyNet net;
  std::vector<StepRecord> storage;

  explicit Fixture(std::uint64_t seed, int records, bool perturb_old = false)
      : net(policy::PolicyNet::initialized(tiny_desc(), seed)) {
    Rng rng(mix_seed(seed, 77));
    {
      std::vector<double> p = net.params();
      for (double& x : p)
        x += 0.1 * rng.next_normal();
      net.set_params(std::move(p));
    }
    policy::PolicyNet old_net = net;
    if (perturb_old) {
      std::vector<double> p = old_net.params();
      for (double& x : p)
        x += 0.05 * rng.next_normal();
      old_net.set_params(std::move(p));
    }
    policy::PolicyDescriptor d = tiny_desc();
    for (int r = 0; r < records; ++r) {
      StepRecord rec;
      rec.obs = {rng.next_normal(), rng.next_normal()};
      rec.chunk.actions.resize(static_cast<std::size_t>(d.C));
      for (auto& a : rec.chunk.actions) {
        a.tokens.resize(static_cast<std::size_t>(d.M));
        for (int& t : a.tokens)
          t = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(d.vocab)));
      }
      rec.token_logprobs = old_net.evaluate_logprobs(rec.obs, rec.chunk);
      rec.rewards.assign(static_cast<std::size_t>(d.C), 0.0);
      rec.terminated.assign(static_cast<std::size_t>(d.C), false);
      rec.truncated.assign(static_cast<std::size_t>(d.C), false);
      rec.valid.assign(static_cast<std::size_t>(d.C), true);
      rec.episode_uid.assign(static_cast<std::size_t>(d.C), 0);
      rec.post_obs.assign(static_cast<std::size_t>(d.C), rec.obs);
      rec.value_vector.assign(static_cast<std::size_t>(d.C), 0.0);
      storage.push_back(std::move(rec));
    }
  }

  PpoBatch ppo_batch(const GranularitySpec& spec, Rng& rng) {
    PpoBatch batch;
    batch.spec = spec;
    batch.C = tiny_desc().C;
    batch.M = tiny_desc().M;
    bool chunk_adv = spec.advantage_level == Level::Chunk;
    for (std::size_t r = 0; r < storage.size(); ++r) {
      PpoRecordView view;
      view.rec = &storage[r];
      view.env = static_cast<int>(r);
      view.counted.assign(static_cast<std::size_t>(batch.C), true);
      view.advantages.assign(chunk_adv ? 1u : static_cast<std::size_t>(batch.C), 0.0);
      view.returns.assign(chunk_adv ? 1u : static_cast<std::size_t>(batch.C), 0.0);
      for (double& a : view.advantages)
        a = rng.next_normal();
      for (double& x : view.returns)
        x = rng.next_normal();
      batch.records.push_back(std::move(view));
    }
    return batch;
  }
};

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i)
    idx[i] = i;
  return idx;
}

} // namespace

TEST_CASE("importance ratio") {
  CHECK(importance_ratio(-1.0, -1.0) == 1.0);
  CHECK(importance_ratio(-1.0, -1.0 - std::log(2.0)) == doctest::Approx(2.0).epsilon(1e-12));
  // direct softmax quotient on a 3-token toy
  std::vector<double> logits_new{0.3, -0.2, 1.0};
  std::vector<double> logits_old{0.0, 0.0, 0.5};
  auto ln = policy::log_softmax(logits_new);
  auto lo = policy::log_softmax(logits_old);
  double pn = std::exp(ln[2]), po = std::exp(lo[2]);
  CHECK(importance_ratio(ln[2], lo[2]) == doctest::Approx(pn / po).epsilon(1e-12));
}

TEST_CASE("PPO surrogate with rho == 1 equals minus the mean advantage") {
  Fixture f(100, 4, /*perturb_old=*/false);
  Rng rng(200);
  PpoBatch batch = f.ppo_batch({Level::Chunk, Level::Chunk, Level::Chunk}, rng);
  PpoParams params;
  params.value_loss_coef = 0.0;
  params.entropy_coef = 0.0;
  auto idx = all_indices(batch.records.size());
  LossDiagnostics diag = ppo_loss(f.net, batch, idx, params, nullptr);
  double mean_adv = 0.0;
  for (const auto& view : batch.records)
    mean_adv += view.advantages[0];
  mean_adv /= static_cast<double>(batch.records.size());
  CHECK(diag.surrogate == doctest::Approx(-mean_adv).epsilon(1e-12));
  CHECK(diag.clip_frac == 0.0);
}

TEST_CASE("forced clipping: positive advantage, rho = 2, eps = 0.2") {
  // One unit with lp_new - lp_old = ln 2 -> surrogate = 1.2 * advantage.
  Fixture f(101, 1, false);
  Rng rng(201);
  PpoBatch batch = f.ppo_batch({Level::Chunk, Level::Chunk, Level::Chunk}, rng);
  batch.records[0].advantages[0] = 2.5;
  // shift stored old logprobs so the new/old ratio is exactly 2
  StepRecord& rec = const_cast<StepRecord&>(*batch.records[0].rec);
  for (double& v : rec.token_logprobs.values)
    v -= std::log(2.0) / 4.0; // C*M = 4 tokens
  PpoParams params;
  params.clip_eps = 0.2;
  params.value_loss_coef = 0.0;
  params.entropy_coef = 0.0;
  auto idx = all_indices(1);
  LossDiagnostics diag = ppo_loss(f.net, batch, idx, params, nullptr);
  CHECK(diag.surrogate == doctest::Approx(-1.2 * 2.5).epsilon(1e-9));
  CHECK(diag.clip_frac == 1.0);
}

TEST_CASE("clip inactivity: surrogate equals importance-weighted objective inside the band") {
  Fixture f(102, 4, /*perturb_old=*/true);
  Rng rng(202);
  for (Level lp : {Level::Chunk, Level::Action, Level::Token}) {
    PpoBatch batch = f.ppo_batch({Level::Chunk, lp, Level::Chunk}, rng);
    PpoParams params;
    params.clip_eps = 1e6; // nothing clips
    params.value_loss_coef = 0.0;
    params.entropy_coef = 0.0;
    auto idx = all_indices(batch.records.size());
    LossDiagnostics diag = ppo_loss(f.net, batch, idx, params, nullptr);

    double direct = 0.0;
    std::int64_t n_units = 0;
    for (const auto& view : batch.records) {
      policy::ChunkEval eval = f.net.evaluate_chunk(view.rec->obs, view.rec->chunk);
      auto new_lp = aggregate_logprob(eval.token_logprobs, lp);
      auto old_lp = aggregate_logprob(view.rec->token_logprobs, lp);
      for (std::size_t u = 0; u < new_lp.size(); ++u)
        direct += std::exp(new_lp[u] - old_lp[u]) * view.advantages[0];
      ++n_units;
    }
    CHECK(diag.surrogate ==
          doctest::Approx(-direct / static_cast<double>(n_units)).epsilon(1e-10));
    CHECK(diag.clip_frac == 0.0);
  }
}

TEST_CASE("granularity identity: token broadcast gradient equals chunk gradient bitwise") {
  Fixture f(103, 5, /*perturb_old=*/false); // theta == theta_old -> rho == 1
  Rng rng(203);
  PpoBatch chunk_batch = f.ppo_batch({Level::Chunk, Level::Chunk, Level::Chunk}, rng);
  PpoBatch token_batch = chunk_batch;
  token_batch.spec.logprob_level = Level::Token;

  PpoParams params;
  params.value_loss_coef = 0.5;
  params.entropy_coef = 0.01;
  auto idx = all_indices(chunk_batch.records.size());

  std::vector<double> grad_chunk(f.net.num_params(), 0.0);
  std::vector<double> grad_token(f.net.num_params(), 0.0);
  ppo_loss(f.net, chunk_batch, idx, params, &grad_chunk);
  ppo_loss(f.net, token_batch, idx, params, &grad_token);
  for (std::size_t i = 0; i < grad_chunk.size(); ++i)
    CHECK(grad_chunk[i] == grad_token[i]); // bitwise
}

TEST_CASE("granularity identity holds for action-level logprob as well") {
  Fixture f(104, 3, false);
  Rng rng(204);
  PpoBatch chunk_batch = f.ppo_batch({Level::Chunk, Level::Chunk, Level::Chunk}, rng);
  PpoBatch action_batch = chunk_batch;
  action_batch.spec.logprob_level = Level::Action;
  PpoParams params;
  auto idx = all_indices(chunk_batch.records.size());
  std::vector<double> g1(f.net.num_params(), 0.0), g2(f.net.num_params(), 0.0);
  ppo_loss(f.net, chunk_batch, idx, params, &g1);
  ppo_loss(f.net, action_batch, idx, params, &g2);
  for (std::size_t i = 0; i < g1.size(); ++i)
    CHECK(g1[i] == g2[i]);
}

TEST_CASE("masked units contribute exactly zero gradient") {
  Fixture f(105, 2, /*perturb_old=*/true);
  Rng rng(205);
  PpoBatch batch = f.ppo_batch({Level::Action, Level::Token, Level::Action}, rng);
  PpoParams params;
  params.entropy_coef = 0.02;
  auto idx = all_indices(batch.records.size());

  std::vector<double> grad_full(f.net.num_params(), 0.0);
  ppo_loss(f.net, batch, idx, params, &grad_full);

  // Mask the second slot of record 0.
  batch.records[0].counted[1] = false;
  std::vector<double> grad_masked(f.net.num_params(), 0.0);
  ppo_loss(f.net, batch, idx, params, &grad_masked);
  CHECK(grad_masked != grad_full);

  // Garbage in the masked slot's stored data must not reach the gradient:
  // equivalent to the slot physically not existing.
  StepRecord& rec = const_cast<StepRecord&>(*batch.records[0].rec);
  rec.token_logprobs.at(1, 0) = -42.0;
  rec.token_logprobs.at(1, 1) = -7.0;
  batch.records[0].advantages[1] = 1e9;
  batch.records[0].returns[1] = -1e9;
  std::vector<double> grad_tampered(f.net.num_params(), 0.0);
  ppo_loss(f.net, batch, idx, params, &grad_tampered);
  for (std::size_t i = 0; i < grad_masked.size(); ++i)
    CHECK(grad_masked[i] == grad_tampered[i]); // bitwise
}

TEST_CASE("GRPO loss: antisymmetric pair with rho == 1 gives zero loss") {
  Fixture f(106, 2, false);
  GrpoBatch batch;
  batch.spec = GranularitySpec{Level::Chunk, Level::Chunk, Level::Chunk};
  batch.C = 2;
  batch.M = 2;
  GrpoGroup group;
  for (int i = 0; i < 2; ++i) {
    GrpoTrajectory traj;
    traj.episode_uid = i;
    traj.env = i;
    traj.advantage = i == 0 ? 1.0 : -1.0;
    TrajChunk chunk;
    chunk.rec = &f.storage[static_cast<std::size_t>(i)];
    chunk.slots = {0, 1};
    chunk.slot_weights = {0.5, 0.5};
    traj.chunks.push_back(chunk);
    group.trajectories.push_back(traj);
  }
  batch.groups.push_back(group);
  GrpoParams params;
  std::vector<std::size_t> idx{0};
  LossDiagnostics diag = grpo_loss(f.net, batch, idx, params, nullptr);
  CHECK(diag.loss == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("GRPO loss: equal total weight regardless of trajectory length") {
  // lengths 2 and 8 in normalized mode contribute equal total weight; with
  // rho == 1 the loss is -(1/G) * (A_1 * 1 + A_2 * 1).
  Fixture f(107, 5, false);
  GrpoBatch batch;
  batch.spec = GranularitySpec{Level::Chunk, Level::Action, Level::Chunk};
  batch.C = 2;
  batch.M = 2;
  GrpoGroup group;
  // trajectory 0: one chunk (2 slots), weights 1/2 each
  {
    GrpoTrajectory traj;
    traj.advantage = 0.7;
    TrajChunk chunk;
    chunk.rec = &f.storage[0];
    chunk.slots = {0, 1};
    chunk.slot_weights = {0.5, 0.5};
    traj.chunks.push_back(chunk);
    group.trajectories.push_back(traj);
  }
  // trajectory 1: four chunks (8 slots), weights 1/8 each
  {
    GrpoTrajectory traj;
    traj.advantage = -0.3;
    for (int t = 0; t < 4; ++t) {
      TrajChunk chunk;
      chunk.rec = &f.storage[static_cast<std::size_t>(1 + t)];
      chunk.slots = {0, 1};
      chunk.slot_weights = {0.125, 0.125};
      traj.chunks.push_back(chunk);
    }
    group.trajectories.push_back(traj);
  }
  batch.groups.push_back(group);
  GrpoParams params;
  std::vector<std::size_t> idx{0};
  LossDiagnostics diag = grpo_loss(f.net, batch, idx, params, nullptr);
  CHECK(diag.loss == doctest::Approx(-0.5 * (0.7 - 0.3)).epsilon(1e-12));
}

TEST_CASE("GRPO hand-built two-group batch against a direct summation oracle") {
  Fixture f(108, 4, /*perturb_old=*/true);
  GrpoBatch batch;
  batch.spec = GranularitySpec{Level::Chunk, Level::Token, Level::Chunk};
  batch.C = 2;
  batch.M = 2;
  Rng rng(208);
  for (int g = 0; g < 2; ++g) {
    GrpoGroup group;
    for (int i = 0; i < 2; ++i) {
      GrpoTrajectory traj;
      traj.advantage = rng.next_normal();
      TrajChunk chunk;
      chunk.rec = &f.storage[static_cast<std::size_t>(g * 2 + i)];
      chunk.slots = {0, 1};
      chunk.slot_weights = {0.5, 0.5};
      traj.chunks.push_back(chunk);
      group.trajectories.push_back(traj);
    }
    batch.groups.push_back(group);
  }
  GrpoParams params;
  params.clip_eps = 0.2;
  std::vector<std::size_t> idx{0, 1};
  LossDiagnostics diag = grpo_loss(f.net, batch, idx, params, nullptr);

  // direct evaluation of the double sum
  double total = 0.0;
  for (const auto& group : batch.groups) {
    double group_sum = 0.0;
    for (const auto& traj : group.trajectories) {
      for (const auto& chunk : traj.chunks) {
        policy::ChunkEval eval = f.net.evaluate_chunk(chunk.rec->obs, chunk.rec->chunk);
        for (std::size_t si = 0; si < chunk.slots.size(); ++si) {
          for (int j = 0; j < batch.M; ++j) {
            double rho = std::exp(eval.token_logprobs.at(chunk.slots[si], j) -
                                  chunk.rec->token_logprobs.at(chunk.slots[si], j));
            double unclipped = rho * traj.advantage;
            double clipped = std::clamp(rho, 0.8, 1.2) * traj.advantage;
            group_sum += chunk.slot_weights[si] * std::min(unclipped, clipped);
          }
        }
      }
    }
    total += group_sum / 2.0; // 1/G
  }
  total /= 2.0; // mean over groups
  CHECK(diag.loss == doctest::Approx(-total).epsilon(1e-12));
}

TEST_CASE("GRPO skip-update on empty retained set") {
  Fixture f(109, 1, false);
  GrpoBatch batch;
  batch.spec = GranularitySpec{Level::Chunk, Level::Chunk, Level::Chunk};
  GrpoParams params;
  std::vector<std::size_t> empty;
  CHECK_THROWS_AS(grpo_loss(f.net, batch, empty, params, nullptr), SkipUpdate);

  Adam adam(f.net.num_params(), 1e-3);
  Rng rng(209);
  UpdateMetrics m = update_grpo(f.net, batch, params, adam, rng);
  CHECK(m.skipped);
}

TEST_CASE("advantage whitening: mean 0, population std 1 over counted units") {
  Fixture f(110, 6, false);
  Rng rng(210);
  PpoBatch batch = f.ppo_batch({Level::Action, Level::Action, Level::Action}, rng);
  batch.records[2].counted[0] = false;
  normalize_advantages(batch);
  double sum = 0.0, sq = 0.0;
  std::int64_t n = 0;
  for (const auto& view : batch.records)
    for (int j = 0; j < batch.C; ++j)
      if (view.counted[static_cast<std::size_t>(j)]) {
        sum += view.advantages[static_cast<std::size_t>(j)];
        ++n;
      }
  double mean = sum / static_cast<double>(n);
  for (const auto& view : batch.records)
    for (int j = 0; j < batch.C; ++j)
      if (view.counted[static_cast<std::size_t>(j)])
        sq += (view.advantages[static_cast<std::size_t>(j)] - mean) *
              (view.advantages[static_cast<std::size_t>(j)] - mean);
  CHECK(std::abs(mean) < 1e-12);
  CHECK(std::sqrt(sq / static_cast<double>(n)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("update is deterministic given the seed") {
  auto run = [] {
    Fixture f(111, 6, true);
    Rng batch_rng(211);
    PpoBatch batch = f.ppo_batch({Level::Chunk, Level::Token, Level::Chunk}, batch_rng);
    PpoParams params;
    params.epochs_per_batch = 2;
    params.minibatch_size = 3;
    Adam adam(f.net.num_params(), 1e-3, 1.0);
    Rng rng(212);
    update_ppo(f.net, batch, params, adam, rng);
    return f.net.params();
  };
  CHECK(run() == run());
}

TEST_CASE("zero-advantage batch moves parameters only through value and entropy terms") {
  Fixture f(112, 4, false);
  Rng rng(213);
  PpoBatch batch = f.ppo_batch({Level::Chunk, Level::Chunk, Level::Chunk}, rng);
  for (auto& view : batch.records)
    view.advantages[0] = 0.0;
  PpoParams params;
  params.advantage_normalization = false;
  params.value_loss_coef = 0.0;
  params.entropy_coef = 0.0;
  params.epochs_per_batch = 1;
  std::vector<double> before = f.net.params();
  Adam adam(f.net.num_params(), 1e-3);
  Rng urng(214);
  update_ppo(f.net, batch, params, adam, urng);
  CHECK(f.net.params() == before); // no surrogate, no value, no entropy

  params.value_loss_coef = 0.5;
  Adam adam2(f.net.num_params(), 1e-3);
  update_ppo(f.net, batch, params, adam2, urng);
  CHECK(f.net.params() != before); // value term moves the trunk and head
}

TEST_CASE("single-batch overfit: loss decreases over epochs on a frozen batch") {
  Fixture f(113, 8, /*perturb_old=*/true);
  Rng rng(215);
  PpoBatch batch = f.ppo_batch({Level::Action, Level::Token, Level::Action}, rng);
  PpoParams params;
  params.epochs_per_batch = 1;
  params.minibatch_size = 0; // full batch
  params.learning_rate = 5e-4;
  params.advantage_normalization = false;
  Adam adam(f.net.num_params(), params.learning_rate, 1.0);
  Rng urng(216);
  auto idx = all_indices(batch.records.size());
  double first = ppo_loss(f.net, batch, idx, params, nullptr).loss;
  for (int e = 0; e < 10; ++e)
    update_ppo(f.net, batch, params, adam, urng);
  double last = ppo_loss(f.net, batch, idx, params, nullptr).loss;
  CHECK(last < first);
}

TEST_CASE("gradient oracle suites pass") {
  harness::OracleReport grads = harness::oracle_gradients(30);
  for (const std::string& line : grads.lines)
    INFO(line);
  CHECK(grads.passed());
}

TEST_CASE("Adam on the quadratic probe drives parameters toward zero") {
  // grad of ||theta||^2/2 is theta itself
  std::vector<double> theta{1.0, -2.0, 3.0};
  Adam adam(3, 0.1);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> grad = theta;
    adam.step(theta, grad);
  }
  for (double v : theta)
    CHECK(std::abs(v) < 0.05);
}

TEST_CASE("gradient norm clipping") {
  std::vector<double> theta{0.0, 0.0};
  Adam adam(2, 0.1, 1.0);
  std::vector<double> grad{30.0, 40.0}; // norm 50
  double norm = adam.step(theta, grad);
  CHECK(norm == doctest::Approx(50.0));
  double post = std::sqrt(grad[0] * grad[0] + grad[1] * grad[1]);
  CHECK(post == doctest::Approx(1.0).epsilon(1e-9));
}
