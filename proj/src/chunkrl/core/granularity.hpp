#pragma once

#include <string>
#include <vector>

#include "chunkrl/core/types.hpp"

namespace chunkrl {

enum class Level { Chunk, Action, Token };

const char* level_name(Level level);
Level level_from_name(const std::string& name); // accepts "chunk_level" etc.

/// True if `a` is strictly coarser than `b` (chunk > action > token).
bool coarser_than(Level a, Level b);

/// The (advantage, logprob, value) granularity triple driving loss assembly.
struct GranularitySpec {
  Level advantage_level = Level::Chunk;
  Level logprob_level = Level::Chunk;
  Level value_level = Level::Chunk; // defaults to advantage_level at config load

  bool operator==(const GranularitySpec&) const = default;
};

/// Throws UnsupportedCombination for the one rejected pairing
/// (action-level advantage with chunk-level log-probability) and
/// rejects value levels finer than the action level.
void validate_granularity(const GranularitySpec& spec);

/// Expands per-source-unit advantages to a finer (or equal) level. Each
/// target unit carries the value of its enclosing source unit. Expansion
/// factors: chunk->action = C, action->token = M, chunk->token = C*M.
/// Throws GranularityOrderViolation if `to` is coarser than `from`.
std::vector<double> broadcast_advantage(const std::vector<double>& adv, Level from,
                                        Level to, int C, int M);

/// Aggregates a C x M token log-prob matrix to the requested level.
/// Summation order is fixed: tokens in ascending order within each action,
/// then action sums in ascending order, so the chunk aggregate equals the
/// sum of action aggregates bit-exactly. Token level is the flattened
/// identity.
std::vector<double> aggregate_logprob(const TokenLogprobs& token_logprobs, Level to);

} // namespace chunkrl
