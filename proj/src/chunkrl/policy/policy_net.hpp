#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "chunkrl/core/granularity.hpp"
#include "chunkrl/core/rng.hpp"
#include "chunkrl/core/types.hpp"

namespace chunkrl::policy {

/// Architecture descriptor; parameter count is a pure function of it.
struct PolicyDescriptor {
  int obs_dim = 1;
  int hidden = 32;       // trunk width
  int trunk_layers = 2;  // tanh layers of hidden x hidden
  int value_hidden = 32; // width of the three-layer value heads
  int vocab = 4;
  int C = 4; // actions per chunk
  int M = 2; // tokens per action

  int positions() const { return C * M; }
  bool operator==(const PolicyDescriptor&) const = default;
};

enum class ValueHeadKind { Scalar, Vector };

struct SampleResult {
  ActionChunk chunk;
  TokenLogprobs token_logprobs;
};

struct ChunkEval {
  TokenLogprobs token_logprobs;
  std::vector<double> entropy; // per position (C*M), natural log
};

/// Tokenized chunk policy: MLP trunk conditioned on the observation plus
/// learned embeddings of the tokens already emitted in the current chunk
/// (autoregressive within the chunk, nothing carries across chunks). A
/// policy head produces vocab logits per position; scalar and C-vector
/// value heads read the trunk feature at position 0.
///
/// All math is double precision with fixed summation order, so results are
/// identical run-to-run and independent of batching.
class PolicyNet {
public:
  explicit PolicyNet(const PolicyDescriptor& desc);

  /// Orthogonal trunk, zero policy/value output layers: the initial policy
  /// is uniform and initial values are zero.
  static PolicyNet initialized(const PolicyDescriptor& desc, std::uint64_t seed);

  const PolicyDescriptor& descriptor() const { return desc_; }
  std::size_t num_params() const { return params_.size(); }
  const std::vector<double>& params() const { return params_; }
  void set_params(std::vector<double> params);
  void add_scaled(std::span<const double> delta, double scale); // theta += scale*delta

  /// Vocab logits for the next token given the tokens already emitted in
  /// this chunk. prefix.size() must be < C*M.
  std::vector<double> forward_logits(const Observation& obs,
                                     std::span<const int> prefix) const;

  /// Draws C*M tokens sequentially; logprobs are the log-softmax entries of
  /// the sampled tokens. temperature scales logits; 0 means argmax (logprobs
  /// then reported from the unscaled distribution).
  SampleResult sample_chunk(const Observation& obs, Rng& rng,
                            double temperature = 1.0) const;

  /// Recomputes token logprobs (and per-position entropies) for a stored
  /// chunk. Matches sample-time logprobs exactly while parameters are
  /// unchanged.
  ChunkEval evaluate_chunk(const Observation& obs, const ActionChunk& chunk) const;
  TokenLogprobs evaluate_logprobs(const Observation& obs, const ActionChunk& chunk) const;
  std::vector<TokenLogprobs> evaluate_logprobs(const std::vector<Observation>& obs,
                                               const std::vector<ActionChunk>& chunks) const;

  /// Value estimates: 1 entry for the scalar head, C for the vector head.
  std::vector<double> value(const Observation& obs, ValueHeadKind head) const;
  /// Same, but throws HeadMismatch when the head disagrees with
  /// spec.value_level (Scalar <-> chunk_level, Vector <-> action_level).
  std::vector<double> value_checked(const Observation& obs, ValueHeadKind head,
                                    const GranularitySpec& spec) const;

  /// Adds sum_p coeff_logprob[p] * d logprob_p / dtheta
  ///    + sum_p coeff_entropy[p] * d entropy_p / dtheta  into grad.
  /// Positions where both coefficients are exactly zero contribute nothing.
  /// Throws NonFinite if a produced gradient term is not finite.
  void accumulate_chunk_gradient(const Observation& obs, const ActionChunk& chunk,
                                 std::span<const double> coeff_logprob,
                                 std::span<const double> coeff_entropy,
                                 std::vector<double>& grad) const;

  /// Adds sum_c coeff[c] * d V_c(obs) / dtheta into grad.
  void accumulate_value_gradient(const Observation& obs, ValueHeadKind head,
                                 std::span<const double> coeff,
                                 std::vector<double>& grad) const;

  struct Layout; // parameter offsets, public for the checkpoint codec

private:
  const Layout& layout() const;

  struct TrunkCache {
    std::vector<double> x;                   // trunk input, size H
    std::vector<std::vector<double>> hidden; // activations per layer, each H
  };
  void trunk_forward(const Observation& obs, std::span<const int> prefix,
                     TrunkCache& cache) const;
  // Backpropagates d_feature through the trunk and input stage; prefix is
  // the token prefix that produced the cached input.
  void trunk_backward(const Observation& obs, std::span<const int> prefix,
                      const TrunkCache& cache, std::vector<double> d_feature,
                      std::vector<double>& grad) const;
  std::vector<double> logits_from_feature(const std::vector<double>& feature) const;

  PolicyDescriptor desc_;
  std::shared_ptr<const Layout> layout_;
  std::vector<double> params_;
};

/// log-softmax with max shift; output[v] = logits[v] - logsumexp(logits).
std::vector<double> log_softmax(std::span<const double> logits);

} // namespace chunkrl::policy
