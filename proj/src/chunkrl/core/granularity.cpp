#include "chunkrl/core/granularity.hpp"

#include <sstream>

#include "chunkrl/core/errors.hpp"

namespace chunkrl {

const char* level_name(Level level) {
  switch (level) {
  case Level::Chunk:
    return "chunk_level";
  case Level::Action:
    return "action_level";
  case Level::Token:
    return "token_level";
  }
  return "?";
}

Level level_from_name(const std::string& name) {
  if (name == "chunk_level" || name == "chunk")
    return Level::Chunk;
  if (name == "action_level" || name == "action")
    return Level::Action;
  if (name == "token_level" || name == "token")
    return Level::Token;
  throw ConfigError("unknown granularity level: " + name);
}

namespace {
int rank(Level level) {
  switch (level) {
  case Level::Chunk:
    return 0;
  case Level::Action:
    return 1;
  case Level::Token:
    return 2;
  }
  return -1;
}
} // namespace

bool coarser_than(Level a, Level b) { return rank(a) < rank(b); }

void validate_granularity(const GranularitySpec& spec) {
  if (spec.advantage_level == Level::Token)
    throw UnsupportedCombination("advantage level must be chunk_level or action_level");
  if (spec.value_level == Level::Token)
    throw UnsupportedCombination("value level must be chunk_level or action_level");
  // Table of supported (advantage, logprob) pairs has a single rejected cell:
  // action-level advantage cannot pair with the coarser chunk-level logprob.
  if (coarser_than(spec.logprob_level, spec.advantage_level)) {
    std::ostringstream msg;
    msg << "unsupported combination: advantage=" << level_name(spec.advantage_level)
        << " with logprob=" << level_name(spec.logprob_level);
    throw UnsupportedCombination(msg.str());
  }
}

std::vector<double> broadcast_advantage(const std::vector<double>& adv, Level from,
                                        Level to, int C, int M) {
  if (coarser_than(to, from))
    throw GranularityOrderViolation("cannot broadcast from " + std::string(level_name(from)) +
                                    " to coarser " + level_name(to));
  int factor = 1;
  if (from == Level::Chunk && to == Level::Action)
    factor = C;
  else if (from == Level::Chunk && to == Level::Token)
    factor = C * M;
  else if (from == Level::Action && to == Level::Token)
    factor = M;

  std::vector<double> out;
  out.reserve(adv.size() * static_cast<std::size_t>(factor));
  for (double a : adv)
    for (int k = 0; k < factor; ++k)
      out.push_back(a);
  return out;
}

std::vector<double> aggregate_logprob(const TokenLogprobs& lp, Level to) {
  std::vector<double> out;
  switch (to) {
  case Level::Token:
    out = lp.values;
    break;
  case Level::Action:
    out.resize(lp.C, 0.0);
    for (int i = 0; i < lp.C; ++i) {
      double s = 0.0;
      for (int j = 0; j < lp.M; ++j)
        s += lp.at(i, j);
      out[static_cast<std::size_t>(i)] = s;
    }
    break;
  case Level::Chunk: {
    // Canonical order: per-action token sums first, then the action sums in
    // ascending order, so chunk == sum(action aggregates) holds bit-exactly.
    double s = 0.0;
    for (int i = 0; i < lp.C; ++i) {
      double a = 0.0;
      for (int j = 0; j < lp.M; ++j)
        a += lp.at(i, j);
      s += a;
    }
    out.push_back(s);
    break;
  }
  }
  return out;
}

} // namespace chunkrl
