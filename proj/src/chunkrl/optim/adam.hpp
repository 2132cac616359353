#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace chunkrl::optim {

/// Plain Adam with optional global gradient-norm clipping.
class Adam {
public:
  Adam(std::size_t num_params, double learning_rate, double max_grad_norm = 0.0,
       double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Clips grad in place when max_grad_norm > 0, then applies one step to
  /// params. Returns the pre-clip gradient norm.
  double step(std::span<double> params, std::span<double> grad);

private:
  double lr_, max_grad_norm_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<double> m_, v_;
};

} // namespace chunkrl::optim
