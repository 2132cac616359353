#include "chunkrl/optim/update.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::optim {

using advantage::GrpoBatch;
using advantage::PpoBatch;

void normalize_advantages(PpoBatch& batch) {
  const bool chunk_adv = batch.spec.advantage_level == Level::Chunk;
  double sum = 0.0;
  std::int64_t n = 0;
  auto for_each_unit = [&](auto&& fn) {
    for (auto& view : batch.records) {
      if (chunk_adv) {
        for (int j = 0; j < batch.C; ++j)
          if (view.counted[static_cast<std::size_t>(j)]) {
            fn(view.advantages[0]);
            break;
          }
      } else {
        for (int j = 0; j < batch.C; ++j)
          if (view.counted[static_cast<std::size_t>(j)])
            fn(view.advantages[static_cast<std::size_t>(j)]);
      }
    }
  };
  for_each_unit([&](double& a) {
    sum += a;
    ++n;
  });
  if (n < 2)
    return;
  double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for_each_unit([&](double& a) { var += (a - mean) * (a - mean); });
  var /= static_cast<double>(n);
  double denom = std::sqrt(var) + 1e-8;
  for_each_unit([&](double& a) { a = (a - mean) / denom; });
}

namespace {
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.next_below(i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}
} // namespace

UpdateMetrics update_ppo(policy::PolicyNet& net, PpoBatch& batch, const PpoParams& params,
                         Adam& adam, Rng& rng) {
  UpdateMetrics metrics;
  if (batch.records.empty() || batch.advantage_unit_count() == 0) {
    metrics.skipped = true;
    return metrics;
  }
  if (params.advantage_normalization)
    normalize_advantages(batch);

  std::vector<double> params_vec;
  std::vector<double> grad(net.num_params());
  const std::size_t mb =
      params.minibatch_size > 0 ? static_cast<std::size_t>(params.minibatch_size)
                                : batch.records.size();
  for (int epoch = 0; epoch < params.epochs_per_batch; ++epoch) {
    std::vector<std::size_t> order = shuffled_indices(batch.records.size(), rng);
    for (std::size_t begin = 0; begin < order.size(); begin += mb) {
      std::size_t end = std::min(begin + mb, order.size());
      std::span<const std::size_t> indices(order.data() + begin, end - begin);
      std::fill(grad.begin(), grad.end(), 0.0);
      LossDiagnostics diag = ppo_loss(net, batch, indices, params, &grad);
      params_vec = net.params();
      metrics.grad_norm = adam.step(params_vec, grad);
      net.set_params(std::move(params_vec));
      metrics.loss += diag.loss;
      metrics.surrogate += diag.surrogate;
      metrics.value_loss += diag.value_loss;
      metrics.entropy += diag.entropy;
      metrics.clip_frac += diag.clip_frac;
      metrics.approx_kl += diag.approx_kl;
      ++metrics.steps;
    }
  }
  if (metrics.steps > 0) {
    double inv = 1.0 / metrics.steps;
    metrics.loss *= inv;
    metrics.surrogate *= inv;
    metrics.value_loss *= inv;
    metrics.entropy *= inv;
    metrics.clip_frac *= inv;
    metrics.approx_kl *= inv;
  }
  return metrics;
}

UpdateMetrics update_grpo(policy::PolicyNet& net, const GrpoBatch& batch,
                          const GrpoParams& params, Adam& adam, Rng& rng) {
  UpdateMetrics metrics;
  if (batch.groups.empty()) {
    metrics.skipped = true;
    return metrics;
  }
  std::vector<double> params_vec;
  std::vector<double> grad(net.num_params());
  const std::size_t mb = params.minibatch_groups > 0
                             ? static_cast<std::size_t>(params.minibatch_groups)
                             : batch.groups.size();
  for (int epoch = 0; epoch < params.epochs_per_batch; ++epoch) {
    std::vector<std::size_t> order = shuffled_indices(batch.groups.size(), rng);
    for (std::size_t begin = 0; begin < order.size(); begin += mb) {
      std::size_t end = std::min(begin + mb, order.size());
      std::span<const std::size_t> indices(order.data() + begin, end - begin);
      std::fill(grad.begin(), grad.end(), 0.0);
      LossDiagnostics diag = grpo_loss(net, batch, indices, params, &grad);
      params_vec = net.params();
      metrics.grad_norm = adam.step(params_vec, grad);
      net.set_params(std::move(params_vec));
      metrics.loss += diag.loss;
      metrics.surrogate += diag.surrogate;
      metrics.clip_frac += diag.clip_frac;
      metrics.approx_kl += diag.approx_kl;
      ++metrics.steps;
    }
  }
  if (metrics.steps > 0) {
    double inv = 1.0 / metrics.steps;
    metrics.loss *= inv;
    metrics.surrogate *= inv;
    metrics.clip_frac *= inv;
    metrics.approx_kl *= inv;
  }
  return metrics;
}

} // namespace chunkrl::optim
