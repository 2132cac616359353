#include "chunkrl/optim/losses.hpp"

#include <algorithm>
#include <cmath>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::optim {

using advantage::GrpoBatch;
using advantage::PpoBatch;
using advantage::TrajChunk;
using policy::ChunkEval;
using policy::PolicyNet;
using policy::ValueHeadKind;

double importance_ratio(double new_logprob, double old_logprob) {
  return std::exp(new_logprob - old_logprob);
}

namespace {

// Surrogate term and its derivative w.r.t. the unit logprob. Gradient flows
// through the unclipped branch when it is selected (ties included); a
// selected clipped branch is saturated and contributes zero.
struct Surrogate {
  double value;
  double dlogprob;
  bool clipped;
};

Surrogate clipped_surrogate(double rho, double adv, double clip_eps) {
  double unclipped = rho * adv;
  double clipped_rho = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps);
  double clipped = clipped_rho * adv;
  Surrogate s;
  s.clipped = std::abs(rho - 1.0) > clip_eps;
  if (unclipped <= clipped) {
    s.value = unclipped;
    s.dlogprob = adv * rho; // d(rho*adv)/dlp = adv * rho
  } else {
    s.value = clipped;
    s.dlogprob = 0.0;
  }
  return s;
}

// Sums new/old logprobs over one action's tokens.
void action_logprob(const ChunkEval& eval, const TokenLogprobs& old_lp, int slot,
                    double& lp_new, double& lp_old) {
  int M = old_lp.M;
  lp_new = 0.0;
  lp_old = 0.0;
  for (int j = 0; j < M; ++j) {
    lp_new += eval.token_logprobs.at(slot, j);
    lp_old += old_lp.at(slot, j);
  }
}

} // namespace

LossDiagnostics ppo_loss(const PolicyNet& net, const PpoBatch& batch,
                         std::span<const std::size_t> record_indices,
                         const PpoParams& params, std::vector<double>* grad_out) {
  const int C = batch.C;
  const int M = batch.M;
  const int P = C * M;
  const bool chunk_adv = batch.spec.advantage_level == Level::Chunk;
  const Level lp_level = batch.spec.logprob_level;
  const ValueHeadKind head = batch.spec.value_level == Level::Chunk ? ValueHeadKind::Scalar
                                                                    : ValueHeadKind::Vector;

  // Pass 1: unit counts for the normalizers (fixed before any summation so
  // every minibatch member sees the same scale).
  std::int64_t n_adv = 0, n_val = 0, n_pos = 0;
  for (std::size_t idx : record_indices) {
    const auto& view = batch.records[idx];
    int counted = 0;
    for (int j = 0; j < C; ++j)
      if (view.counted[static_cast<std::size_t>(j)])
        ++counted;
    if (counted == 0)
      continue;
    n_adv += chunk_adv ? 1 : counted;
    n_val += batch.spec.value_level == Level::Chunk ? 1 : counted;
    n_pos += static_cast<std::int64_t>(counted) * M;
  }

  LossDiagnostics diag;
  if (n_adv == 0)
    return diag;

  double surrogate_sum = 0.0;
  double value_sq_sum = 0.0;
  double entropy_sum = 0.0;
  double kl_sum = 0.0;
  std::int64_t clipped_units = 0, lp_units = 0;

  const double inv_adv = 1.0 / static_cast<double>(n_adv);
  const double inv_val = n_val > 0 ? 1.0 / static_cast<double>(n_val) : 0.0;
  const double inv_pos = n_pos > 0 ? 1.0 / static_cast<double>(n_pos) : 0.0;

  std::vector<double> coeff_lp(static_cast<std::size_t>(P));
  std::vector<double> coeff_ent(static_cast<std::size_t>(P));

  for (std::size_t idx : record_indices) {
    const auto& view = batch.records[idx];
    const StepRecord& rec = *view.rec;
    bool any = false;
    for (int j = 0; j < C; ++j)
      any = any || view.counted[static_cast<std::size_t>(j)];
    if (!any)
      continue;

    ChunkEval eval = net.evaluate_chunk(rec.obs, rec.chunk);
    std::fill(coeff_lp.begin(), coeff_lp.end(), 0.0);
    std::fill(coeff_ent.begin(), coeff_ent.end(), 0.0);

    // Surrogate units at the logprob level, summed inside each advantage
    // unit; slot and token order fixed ascending.
    auto add_unit = [&](double lp_new, double lp_old, double adv, int slot_begin,
                        int slot_end, int token_begin, int token_end) {
      double rho = importance_ratio(lp_new, lp_old);
      Surrogate s = clipped_surrogate(rho, adv, params.clip_eps);
      surrogate_sum += s.value;
      ++lp_units;
      if (s.clipped)
        ++clipped_units;
      double log_rho = lp_new - lp_old;
      kl_sum += (rho - 1.0) - log_rho;
      if (grad_out) {
        double k = -inv_adv * s.dlogprob; // dLoss/dlp for this unit
        for (int i = slot_begin; i < slot_end; ++i)
          for (int j = token_begin; j < token_end; ++j)
            coeff_lp[static_cast<std::size_t>(i * M + j)] += k;
      }
    };

    if (chunk_adv && lp_level == Level::Chunk) {
      double lp_new = 0.0, lp_old = 0.0;
      for (int i = 0; i < C; ++i) {
        if (!view.counted[static_cast<std::size_t>(i)])
          continue;
        double an, ao;
        action_logprob(eval, rec.token_logprobs, i, an, ao);
        lp_new += an;
        lp_old += ao;
      }
      // The coefficient applies to every counted token position.
      double rho = importance_ratio(lp_new, lp_old);
      Surrogate s = clipped_surrogate(rho, view.advantages[0], params.clip_eps);
      surrogate_sum += s.value;
      ++lp_units;
      if (s.clipped)
        ++clipped_units;
      kl_sum += (rho - 1.0) - (lp_new - lp_old);
      if (grad_out) {
        double k = -inv_adv * s.dlogprob;
        for (int i = 0; i < C; ++i)
          if (view.counted[static_cast<std::size_t>(i)])
            for (int j = 0; j < M; ++j)
              coeff_lp[static_cast<std::size_t>(i * M + j)] += k;
      }
    } else {
      for (int i = 0; i < C; ++i) {
        if (!view.counted[static_cast<std::size_t>(i)])
          continue;
        double adv = view.advantages[chunk_adv ? 0 : static_cast<std::size_t>(i)];
        if (lp_level == Level::Action) {
          double an, ao;
          action_logprob(eval, rec.token_logprobs, i, an, ao);
          add_unit(an, ao, adv, i, i + 1, 0, M);
        } else { // token level
          for (int j = 0; j < M; ++j)
            add_unit(eval.token_logprobs.at(i, j), rec.token_logprobs.at(i, j), adv, i,
                     i + 1, j, j + 1);
        }
      }
    }

    // Entropy bonus over counted positions.
    for (int i = 0; i < C; ++i) {
      if (!view.counted[static_cast<std::size_t>(i)])
        continue;
      for (int j = 0; j < M; ++j) {
        entropy_sum += eval.entropy[static_cast<std::size_t>(i * M + j)];
        if (grad_out && params.entropy_coef != 0.0)
          coeff_ent[static_cast<std::size_t>(i * M + j)] = -params.entropy_coef * inv_pos;
      }
    }

    if (grad_out)
      net.accumulate_chunk_gradient(rec.obs, rec.chunk, coeff_lp, coeff_ent, *grad_out);

    // Value loss at the value level.
    std::vector<double> v = net.value(rec.obs, head);
    if (batch.spec.value_level == Level::Chunk) {
      double err = v[0] - view.returns[0];
      value_sq_sum += err * err;
      if (grad_out) {
        double coeff = params.value_loss_coef * 2.0 * err * inv_val;
        net.accumulate_value_gradient(rec.obs, head, std::span<const double>(&coeff, 1),
                                      *grad_out);
      }
    } else {
      std::vector<double> coeffs(static_cast<std::size_t>(C), 0.0);
      bool any_val = false;
      for (int j = 0; j < C; ++j) {
        if (!view.counted[static_cast<std::size_t>(j)])
          continue;
        double err = v[static_cast<std::size_t>(j)] - view.returns[static_cast<std::size_t>(j)];
        value_sq_sum += err * err;
        coeffs[static_cast<std::size_t>(j)] = params.value_loss_coef * 2.0 * err * inv_val;
        any_val = true;
      }
      if (grad_out && any_val)
        net.accumulate_value_gradient(rec.obs, head, coeffs, *grad_out);
    }
  }

  diag.surrogate = -surrogate_sum * inv_adv;
  diag.value_loss = value_sq_sum * inv_val;
  diag.entropy = entropy_sum * inv_pos;
  diag.loss = diag.surrogate + params.value_loss_coef * diag.value_loss -
              params.entropy_coef * diag.entropy;
  diag.clip_frac = lp_units > 0 ? static_cast<double>(clipped_units) / lp_units : 0.0;
  diag.approx_kl = lp_units > 0 ? kl_sum / static_cast<double>(lp_units) : 0.0;
  diag.units = lp_units;
  if (!std::isfinite(diag.loss))
    throw NonFinite("PPO loss is not finite");
  return diag;
}

LossDiagnostics grpo_loss(const PolicyNet& net, const GrpoBatch& batch,
                          std::span<const std::size_t> group_indices,
                          const GrpoParams& params, std::vector<double>* grad_out) {
  if (group_indices.empty())
    throw SkipUpdate("no GRPO groups retained");
  const int M = batch.M;
  const Level lp_level = batch.spec.logprob_level;

  LossDiagnostics diag;
  double total = 0.0;
  double kl_sum = 0.0;
  std::int64_t lp_units = 0, clipped_units = 0;
  const double inv_groups = 1.0 / static_cast<double>(group_indices.size());

  std::vector<double> coeff_lp;
  std::vector<double> coeff_ent;

  for (std::size_t gi : group_indices) {
    const auto& group = batch.groups[gi];
    const double inv_g = 1.0 / static_cast<double>(group.trajectories.size());
    for (const auto& traj : group.trajectories) {
      for (const TrajChunk& chunk : traj.chunks) {
        const StepRecord& rec = *chunk.rec;
        ChunkEval eval = net.evaluate_chunk(rec.obs, rec.chunk);
        coeff_lp.assign(eval.token_logprobs.values.size(), 0.0);
        coeff_ent.assign(eval.token_logprobs.values.size(), 0.0);
        bool any = false;

        auto add_unit = [&](double lp_new, double lp_old, double weight,
                            std::span<const int> slots, int token_begin, int token_end) {
          double rho = importance_ratio(lp_new, lp_old);
          Surrogate s = clipped_surrogate(rho, traj.advantage, params.clip_eps);
          total += inv_groups * inv_g * weight * s.value;
          ++lp_units;
          if (s.clipped)
            ++clipped_units;
          kl_sum += (rho - 1.0) - (lp_new - lp_old);
          if (grad_out) {
            double k = -inv_groups * inv_g * weight * s.dlogprob;
            for (int slot : slots)
              for (int j = token_begin; j < token_end; ++j)
                coeff_lp[static_cast<std::size_t>(slot * M + j)] += k;
            any = true;
          }
        };

        if (lp_level == Level::Chunk) {
          // Unit covers the chunk's weighted slots; weight is their sum.
          double lp_new = 0.0, lp_old = 0.0, weight = 0.0;
          std::vector<int> covered;
          for (std::size_t si = 0; si < chunk.slots.size(); ++si) {
            if (chunk.slot_weights[si] == 0.0)
              continue;
            int slot = chunk.slots[si];
            double an, ao;
            action_logprob(eval, rec.token_logprobs, slot, an, ao);
            lp_new += an;
            lp_old += ao;
            weight += chunk.slot_weights[si];
            covered.push_back(slot);
          }
          if (!covered.empty())
            add_unit(lp_new, lp_old, weight, covered, 0, M);
        } else {
          for (std::size_t si = 0; si < chunk.slots.size(); ++si) {
            if (chunk.slot_weights[si] == 0.0)
              continue;
            int slot = chunk.slots[si];
            int slots_arr[1] = {slot};
            if (lp_level == Level::Action) {
              double an, ao;
              action_logprob(eval, rec.token_logprobs, slot, an, ao);
              add_unit(an, ao, chunk.slot_weights[si], slots_arr, 0, M);
            } else {
              for (int j = 0; j < M; ++j)
                add_unit(eval.token_logprobs.at(slot, j), rec.token_logprobs.at(slot, j),
                         chunk.slot_weights[si], slots_arr, j, j + 1);
            }
          }
        }

        if (grad_out && any)
          net.accumulate_chunk_gradient(rec.obs, rec.chunk, coeff_lp, coeff_ent, *grad_out);
      }
    }
  }

  diag.surrogate = -total;
  diag.loss = diag.surrogate;
  diag.clip_frac = lp_units > 0 ? static_cast<double>(clipped_units) / lp_units : 0.0;
  diag.approx_kl = lp_units > 0 ? kl_sum / static_cast<double>(lp_units) : 0.0;
  diag.units = lp_units;
  if (!std::isfinite(diag.loss))
    throw NonFinite("GRPO loss is not finite");
  return diag;
}

} // namespace chunkrl::optim
