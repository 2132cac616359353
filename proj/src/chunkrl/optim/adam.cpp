#include "chunkrl/optim/adam.hpp"

#include <cmath>
#include <cstdint>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::optim {

Adam::Adam(std::size_t num_params, double learning_rate, double max_grad_norm,
           double beta1, double beta2, double eps)
    : lr_(learning_rate), max_grad_norm_(max_grad_norm), beta1_(beta1), beta2_(beta2),
      eps_(eps), m_(num_params, 0.0), v_(num_params, 0.0) {}

double Adam::step(std::span<double> params, std::span<double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw LengthMismatch("Adam buffer size mismatch");
  double norm_sq = 0.0;
  for (double g : grad)
    norm_sq += g * g;
  double norm = std::sqrt(norm_sq);
  if (!std::isfinite(norm))
    throw NonFinite("gradient norm is not finite");
  if (max_grad_norm_ > 0.0 && norm > max_grad_norm_) {
    double scale = max_grad_norm_ / norm;
    for (double& g : grad)
      g *= scale;
  }
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    double mhat = m_[i] / bc1;
    double vhat = v_[i] / bc2;
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
  return norm;
}

} // namespace chunkrl::optim
