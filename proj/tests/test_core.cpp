#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chunkrl/core/errors.hpp"
#include "chunkrl/core/granularity.hpp"
#include "chunkrl/core/rng.hpp"

using namespace chunkrl;

TEST_CASE("granularity validation accepts exactly five of the six cells") {
  int accepted = 0;
  for (Level adv : {Level::Chunk, Level::Action}) {
    for (Level lp : {Level::Chunk, Level::Action, Level::Token}) {
      GranularitySpec spec{adv, lp, adv};
      try {
        validate_granularity(spec);
        ++accepted;
      } catch (const UnsupportedCombination&) {
        CHECK(adv == Level::Action);
        CHECK(lp == Level::Chunk);
      }
    }
  }
  CHECK(accepted == 5);
}

TEST_CASE("granularity examples") {
  CHECK_NOTHROW(validate_granularity({Level::Chunk, Level::Token, Level::Chunk}));
  CHECK_NOTHROW(validate_granularity({Level::Chunk, Level::Chunk, Level::Chunk}));
  CHECK_THROWS_AS(validate_granularity({Level::Action, Level::Chunk, Level::Action}),
                  UnsupportedCombination);
}

TEST_CASE("broadcast_advantage expands to finer levels") {
  SUBCASE("chunk to token") {
    auto out = broadcast_advantage({0.7}, Level::Chunk, Level::Token, 2, 3);
    REQUIRE(out.size() == 6);
    for (double v : out)
      CHECK(v == 0.7);
  }
  SUBCASE("action to token") {
    auto out = broadcast_advantage({1.5, -2.0}, Level::Action, Level::Token, 2, 2);
    REQUIRE(out.size() == 4);
    CHECK(out[0] == 1.5);
    CHECK(out[1] == 1.5);
    CHECK(out[2] == -2.0);
    CHECK(out[3] == -2.0);
  }
  SUBCASE("identity") {
    auto out = broadcast_advantage({3.0}, Level::Chunk, Level::Chunk, 4, 2);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == 3.0);
  }
  SUBCASE("coarser target rejected") {
    CHECK_THROWS_AS(broadcast_advantage({1.0, 2.0}, Level::Action, Level::Chunk, 2, 2),
                    GranularityOrderViolation);
  }
}

TEST_CASE("broadcast then averaging over the expansion recovers the source") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    int C = 1 + static_cast<int>(rng.next_below(4));
    int M = 1 + static_cast<int>(rng.next_below(4));
    std::vector<double> adv(static_cast<std::size_t>(C));
    for (double& a : adv)
      a = rng.next_normal();
    auto out = broadcast_advantage(adv, Level::Action, Level::Token, C, M);
    for (int i = 0; i < C; ++i) {
      double sum = 0.0;
      for (int j = 0; j < M; ++j)
        sum += out[static_cast<std::size_t>(i * M + j)];
      CHECK(sum / M == doctest::Approx(adv[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("aggregate_logprob levels") {
  TokenLogprobs lp;
  lp.C = 2;
  lp.M = 2;
  lp.values = {-1.0, -2.0, -3.0, -4.0};

  auto action = aggregate_logprob(lp, Level::Action);
  REQUIRE(action.size() == 2);
  CHECK(action[0] == -3.0);
  CHECK(action[1] == -7.0);

  auto chunk = aggregate_logprob(lp, Level::Chunk);
  REQUIRE(chunk.size() == 1);
  CHECK(chunk[0] == -10.0);

  auto token = aggregate_logprob(lp, Level::Token);
  CHECK(token == lp.values);

  TokenLogprobs zeros;
  zeros.C = 3;
  zeros.M = 2;
  zeros.values.assign(6, 0.0);
  CHECK(aggregate_logprob(zeros, Level::Chunk)[0] == 0.0);
}

TEST_CASE("aggregation routes agree bit-exactly in the canonical order") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    TokenLogprobs lp;
    lp.C = 1 + static_cast<int>(rng.next_below(5));
    lp.M = 1 + static_cast<int>(rng.next_below(5));
    lp.values.resize(static_cast<std::size_t>(lp.C * lp.M));
    for (double& v : lp.values)
      v = -5.0 * rng.next_double();

    auto chunk = aggregate_logprob(lp, Level::Chunk);
    auto action = aggregate_logprob(lp, Level::Action);
    auto token = aggregate_logprob(lp, Level::Token);

    double from_actions = 0.0;
    for (double a : action)
      from_actions += a;
    CHECK(chunk[0] == from_actions); // bitwise

    double from_tokens = 0.0;
    for (int i = 0; i < lp.C; ++i) {
      double a = 0.0;
      for (int j = 0; j < lp.M; ++j)
        a += token[static_cast<std::size_t>(i * lp.M + j)];
      from_tokens += a;
    }
    CHECK(chunk[0] == from_tokens); // bitwise, canonical order
  }
}

TEST_CASE("rng determinism") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i)
    CHECK(a.next_u64() == b.next_u64());
  Rng c(124);
  CHECK(Rng(123).next_u64() != c.next_u64());
}
