#include "chunkrl/policy/policy_net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "chunkrl/core/errors.hpp"

namespace chunkrl::policy {

namespace {

void matvec(const double* W, int rows, int cols, const double* x, double* out) {
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    const double* row = W + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c)
      s += row[c] * x[c];
    out[r] = s;
  }
}

// out += W^T * d  (accumulate into a cols-sized vector)
void matvec_transpose_add(const double* W, int rows, int cols, const double* d,
                          double* out) {
  for (int r = 0; r < rows; ++r) {
    const double* row = W + static_cast<std::size_t>(r) * cols;
    double dr = d[r];
    for (int c = 0; c < cols; ++c)
      out[c] += row[c] * dr;
  }
}

// gW += d (outer) x ; gb += d
void outer_add(double* gW, double* gb, int rows, int cols, const double* d,
               const double* x) {
  for (int r = 0; r < rows; ++r) {
    double* grow = gW + static_cast<std::size_t>(r) * cols;
    double dr = d[r];
    for (int c = 0; c < cols; ++c)
      grow[c] += dr * x[c];
    gb[r] += dr;
  }
}

// Modified Gram-Schmidt over the leading `count` vectors of length `dim`
// stored at stride `stride` starting from `base`.
void gram_schmidt(double* base, int count, int dim, std::ptrdiff_t vec_stride,
                  std::ptrdiff_t elem_stride, double gain, Rng& rng) {
  auto at = [&](int v, int e) -> double& {
    return base[v * vec_stride + e * elem_stride];
  };
  for (int v = 0; v < count; ++v)
    for (int e = 0; e < dim; ++e)
      at(v, e) = rng.next_normal();
  for (int v = 0; v < count; ++v) {
    for (int p = 0; p < v; ++p) {
      double dot = 0.0;
      for (int e = 0; e < dim; ++e)
        dot += at(v, e) * at(p, e);
      for (int e = 0; e < dim; ++e)
        at(v, e) -= dot * at(p, e);
    }
    double norm = 0.0;
    for (int e = 0; e < dim; ++e)
      norm += at(v, e) * at(v, e);
    norm = std::sqrt(norm);
    if (norm < 1e-8) { // re-draw a degenerate vector
      for (int e = 0; e < dim; ++e)
        at(v, e) = rng.next_normal();
      --v;
      continue;
    }
    for (int e = 0; e < dim; ++e)
      at(v, e) = at(v, e) / norm * gain;
  }
}

// Semi-orthogonal init of a rows x cols row-major matrix: the smaller
// dimension is orthonormalized so the result is always well-defined.
void semi_orthogonal(double* W, int rows, int cols, double gain, Rng& rng) {
  if (rows <= cols)
    gram_schmidt(W, rows, cols, cols, 1, gain, rng);
  else
    gram_schmidt(W, cols, rows, 1, cols, gain, rng);
}

} // namespace

std::vector<double> log_softmax(std::span<const double> logits) {
  double mx = logits[0];
  for (double v : logits)
    mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits)
    sum += std::exp(v - mx);
  double lse = mx + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i)
    out[i] = logits[i] - lse;
  return out;
}

// Flat parameter layout. Order: input projection, position biases, token
// embeddings, trunk layers, policy head, scalar value head, vector value
// head. Offsets derived once from the descriptor.
struct PolicyNet::Layout {
  int D, H, L, Hv, V, C, P;
  std::size_t w_in, b_in, pos_bias, emb, trunk, w_pol, b_pol;
  std::size_t v1_w, v1_b, v2_w, v2_b, v3_w, v3_b; // scalar head
  std::size_t c1_w, c1_b, c2_w, c2_b, c3_w, c3_b; // vector head
  std::size_t total;

  explicit Layout(const PolicyDescriptor& d)
      : D(d.obs_dim), H(d.hidden), L(d.trunk_layers), Hv(d.value_hidden), V(d.vocab),
        C(d.C), P(d.positions()) {
    std::size_t off = 0;
    auto take = [&off](std::size_t n) {
      std::size_t at = off;
      off += n;
      return at;
    };
    w_in = take(static_cast<std::size_t>(H) * D);
    b_in = take(static_cast<std::size_t>(H));
    pos_bias = take(static_cast<std::size_t>(P) * H);
    emb = take(static_cast<std::size_t>(P) * V * H);
    trunk = take(static_cast<std::size_t>(L) * (static_cast<std::size_t>(H) * H + H));
    w_pol = take(static_cast<std::size_t>(V) * H);
    b_pol = take(static_cast<std::size_t>(V));
    v1_w = take(static_cast<std::size_t>(Hv) * H);
    v1_b = take(static_cast<std::size_t>(Hv));
    v2_w = take(static_cast<std::size_t>(Hv) * Hv);
    v2_b = take(static_cast<std::size_t>(Hv));
    v3_w = take(static_cast<std::size_t>(Hv));
    v3_b = take(1);
    c1_w = take(static_cast<std::size_t>(Hv) * H);
    c1_b = take(static_cast<std::size_t>(Hv));
    c2_w = take(static_cast<std::size_t>(Hv) * Hv);
    c2_b = take(static_cast<std::size_t>(Hv));
    c3_w = take(static_cast<std::size_t>(C) * Hv);
    c3_b = take(static_cast<std::size_t>(C));
    total = off;
  }

  std::size_t trunk_w(int layer) const {
    return trunk + static_cast<std::size_t>(layer) * (static_cast<std::size_t>(H) * H + H);
  }
  std::size_t trunk_b(int layer) const { return trunk_w(layer) + static_cast<std::size_t>(H) * H; }
  std::size_t emb_at(int pos, int tok) const {
    return emb + (static_cast<std::size_t>(pos) * V + tok) * H;
  }
};

const PolicyNet::Layout& PolicyNet::layout() const { return *layout_; }

PolicyNet::PolicyNet(const PolicyDescriptor& desc)
    : desc_(desc), layout_(std::make_shared<const Layout>(desc)) {
  params_.assign(layout_->total, 0.0);
}

PolicyNet PolicyNet::initialized(const PolicyDescriptor& desc, std::uint64_t seed) {
  PolicyNet net(desc);
  const Layout& L = net.layout();
  Rng rng(mix_seed(seed, 0x90110e7ull));
  double* p = net.params_.data();
  const double gain = std::sqrt(2.0);

  semi_orthogonal(p + L.w_in, L.H, L.D, gain, rng);
  for (int l = 0; l < L.L; ++l)
    semi_orthogonal(p + L.trunk_w(l), L.H, L.H, gain, rng);
  semi_orthogonal(p + L.v1_w, L.Hv, L.H, gain, rng);
  semi_orthogonal(p + L.v2_w, L.Hv, L.Hv, gain, rng);
  semi_orthogonal(p + L.c1_w, L.Hv, L.H, gain, rng);
  semi_orthogonal(p + L.c2_w, L.Hv, L.Hv, gain, rng);
  // Prefix embeddings small but nonzero so the factorization is sensitive
  // to the emitted prefix from the start; output layers stay zero.
  for (int k = 0; k < L.P; ++k)
    for (int v = 0; v < L.V; ++v)
      for (int h = 0; h < L.H; ++h)
        net.params_[L.emb_at(k, v) + static_cast<std::size_t>(h)] = 0.1 * rng.next_normal();
  return net;
}

void PolicyNet::set_params(std::vector<double> params) {
  if (params.size() != layout().total)
    throw LengthMismatch("parameter vector size mismatch");
  params_ = std::move(params);
}

void PolicyNet::add_scaled(std::span<const double> delta, double scale) {
  if (delta.size() != params_.size())
    throw LengthMismatch("parameter delta size mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i)
    params_[i] += scale * delta[i];
}

void PolicyNet::trunk_forward(const Observation& obs, std::span<const int> prefix,
                              TrunkCache& cache) const {
  const Layout& L = layout();
  if (static_cast<int>(obs.size()) != L.D)
    throw LengthMismatch("observation dimension mismatch");
  const double* p = params_.data();
  int pos = static_cast<int>(prefix.size());

  cache.x.assign(static_cast<std::size_t>(L.H), 0.0);
  matvec(p + L.w_in, L.H, L.D, obs.data(), cache.x.data());
  const double* bias = p + L.b_in;
  const double* pos_bias = p + L.pos_bias + static_cast<std::size_t>(pos) * L.H;
  for (int h = 0; h < L.H; ++h)
    cache.x[static_cast<std::size_t>(h)] += bias[h] + pos_bias[h];
  for (int k = 0; k < pos; ++k) {
    const double* e = p + L.emb_at(k, prefix[static_cast<std::size_t>(k)]);
    for (int h = 0; h < L.H; ++h)
      cache.x[static_cast<std::size_t>(h)] += e[h];
  }

  cache.hidden.assign(static_cast<std::size_t>(L.L), {});
  const std::vector<double>* in = &cache.x;
  for (int l = 0; l < L.L; ++l) {
    auto& out = cache.hidden[static_cast<std::size_t>(l)];
    out.assign(static_cast<std::size_t>(L.H), 0.0);
    matvec(p + L.trunk_w(l), L.H, L.H, in->data(), out.data());
    const double* b = p + L.trunk_b(l);
    for (int h = 0; h < L.H; ++h)
      out[static_cast<std::size_t>(h)] = std::tanh(out[static_cast<std::size_t>(h)] + b[h]);
    in = &out;
  }
}

void PolicyNet::trunk_backward(const Observation& obs, std::span<const int> prefix,
                               const TrunkCache& cache, std::vector<double> d_feature,
                               std::vector<double>& grad) const {
  const Layout& L = layout();
  const double* p = params_.data();
  double* g = grad.data();
  int pos = static_cast<int>(prefix.size());

  std::vector<double> d_in(static_cast<std::size_t>(L.H));
  for (int l = L.L - 1; l >= 0; --l) {
    const auto& act = cache.hidden[static_cast<std::size_t>(l)];
    for (int h = 0; h < L.H; ++h) {
      double a = act[static_cast<std::size_t>(h)];
      d_feature[static_cast<std::size_t>(h)] *= (1.0 - a * a); // tanh'
    }
    const std::vector<double>& in =
        l == 0 ? cache.x : cache.hidden[static_cast<std::size_t>(l - 1)];
    outer_add(g + L.trunk_w(l), g + L.trunk_b(l), L.H, L.H, d_feature.data(), in.data());
    std::fill(d_in.begin(), d_in.end(), 0.0);
    matvec_transpose_add(p + L.trunk_w(l), L.H, L.H, d_feature.data(), d_in.data());
    d_feature = d_in;
  }

  // d_feature now holds dL/dx.
  outer_add(g + L.w_in, g + L.b_in, L.H, L.D, d_feature.data(), obs.data());
  double* gp = g + L.pos_bias + static_cast<std::size_t>(pos) * L.H;
  for (int h = 0; h < L.H; ++h)
    gp[h] += d_feature[static_cast<std::size_t>(h)];
  for (int k = 0; k < pos; ++k) {
    double* ge = g + L.emb_at(k, prefix[static_cast<std::size_t>(k)]);
    for (int h = 0; h < L.H; ++h)
      ge[h] += d_feature[static_cast<std::size_t>(h)];
  }
}

std::vector<double> PolicyNet::logits_from_feature(const std::vector<double>& feature) const {
  const Layout& L = layout();
  const double* p = params_.data();
  std::vector<double> logits(static_cast<std::size_t>(L.V), 0.0);
  matvec(p + L.w_pol, L.V, L.H, feature.data(), logits.data());
  const double* b = p + L.b_pol;
  for (int v = 0; v < L.V; ++v)
    logits[static_cast<std::size_t>(v)] += b[v];
  return logits;
}

std::vector<double> PolicyNet::forward_logits(const Observation& obs,
                                              std::span<const int> prefix) const {
  const Layout& L = layout();
  if (static_cast<int>(prefix.size()) >= L.P)
    throw LengthMismatch("prefix must be shorter than C*M");
  TrunkCache cache;
  trunk_forward(obs, prefix, cache);
  return logits_from_feature(cache.hidden.empty() ? cache.x : cache.hidden.back());
}

SampleResult PolicyNet::sample_chunk(const Observation& obs, Rng& rng,
                                     double temperature) const {
  const Layout& L = layout();
  SampleResult res;
  res.token_logprobs.C = desc_.C;
  res.token_logprobs.M = desc_.M;
  res.token_logprobs.values.resize(static_cast<std::size_t>(L.P));
  res.chunk.actions.resize(static_cast<std::size_t>(desc_.C));
  for (auto& a : res.chunk.actions)
    a.tokens.resize(static_cast<std::size_t>(desc_.M));

  std::vector<int> prefix;
  prefix.reserve(static_cast<std::size_t>(L.P));
  for (int pos = 0; pos < L.P; ++pos) {
    std::vector<double> logits = forward_logits(obs, prefix);
    std::vector<double> ls = log_softmax(logits);
    int tok;
    if (temperature == 0.0) {
      tok = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    } else {
      std::vector<double> scaled = logits;
      if (temperature != 1.0) {
        for (double& v : scaled)
          v /= temperature;
        ls = log_softmax(scaled);
      }
      double u = rng.next_double();
      double acc = 0.0;
      tok = L.V - 1;
      for (int v = 0; v < L.V; ++v) {
        acc += std::exp(ls[static_cast<std::size_t>(v)]);
        if (u < acc) {
          tok = v;
          break;
        }
      }
      if (temperature != 1.0)
        ls = log_softmax(logits); // report logprobs of the unscaled policy
    }
    res.chunk.actions[static_cast<std::size_t>(pos / desc_.M)]
        .tokens[static_cast<std::size_t>(pos % desc_.M)] = tok;
    res.token_logprobs.values[static_cast<std::size_t>(pos)] = ls[static_cast<std::size_t>(tok)];
    prefix.push_back(tok);
  }
  return res;
}

ChunkEval PolicyNet::evaluate_chunk(const Observation& obs, const ActionChunk& chunk) const {
  const Layout& L = layout();
  if (chunk.chunk_length() != desc_.C)
    throw LengthMismatch("chunk length mismatch");
  ChunkEval eval;
  eval.token_logprobs.C = desc_.C;
  eval.token_logprobs.M = desc_.M;
  eval.token_logprobs.values.resize(static_cast<std::size_t>(L.P));
  eval.entropy.resize(static_cast<std::size_t>(L.P));

  std::vector<int> prefix;
  prefix.reserve(static_cast<std::size_t>(L.P));
  for (int pos = 0; pos < L.P; ++pos) {
    int tok = chunk.actions[static_cast<std::size_t>(pos / desc_.M)]
                  .tokens[static_cast<std::size_t>(pos % desc_.M)];
    std::vector<double> ls = log_softmax(forward_logits(obs, prefix));
    eval.token_logprobs.values[static_cast<std::size_t>(pos)] = ls[static_cast<std::size_t>(tok)];
    double h = 0.0;
    for (int v = 0; v < L.V; ++v)
      h -= std::exp(ls[static_cast<std::size_t>(v)]) * ls[static_cast<std::size_t>(v)];
    eval.entropy[static_cast<std::size_t>(pos)] = h;
    prefix.push_back(tok);
  }
  return eval;
}

TokenLogprobs PolicyNet::evaluate_logprobs(const Observation& obs,
                                           const ActionChunk& chunk) const {
  return evaluate_chunk(obs, chunk).token_logprobs;
}

std::vector<TokenLogprobs> PolicyNet::evaluate_logprobs(
    const std::vector<Observation>& obs, const std::vector<ActionChunk>& chunks) const {
  if (obs.size() != chunks.size())
    throw LengthMismatch("batch size mismatch");
  std::vector<TokenLogprobs> out;
  out.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i)
    out.push_back(evaluate_logprobs(obs[i], chunks[i]));
  return out;
}

std::vector<double> PolicyNet::value(const Observation& obs, ValueHeadKind head) const {
  const Layout& L = layout();
  TrunkCache cache;
  trunk_forward(obs, {}, cache);
  const std::vector<double>& f = cache.hidden.empty() ? cache.x : cache.hidden.back();
  const double* p = params_.data();

  std::size_t w1 = head == ValueHeadKind::Scalar ? L.v1_w : L.c1_w;
  std::size_t b1 = head == ValueHeadKind::Scalar ? L.v1_b : L.c1_b;
  std::size_t w2 = head == ValueHeadKind::Scalar ? L.v2_w : L.c2_w;
  std::size_t b2 = head == ValueHeadKind::Scalar ? L.v2_b : L.c2_b;
  std::size_t w3 = head == ValueHeadKind::Scalar ? L.v3_w : L.c3_w;
  std::size_t b3 = head == ValueHeadKind::Scalar ? L.v3_b : L.c3_b;
  int out_dim = head == ValueHeadKind::Scalar ? 1 : L.C;

  std::vector<double> u1(static_cast<std::size_t>(L.Hv), 0.0);
  matvec(p + w1, L.Hv, L.H, f.data(), u1.data());
  for (int h = 0; h < L.Hv; ++h)
    u1[static_cast<std::size_t>(h)] = std::tanh(u1[static_cast<std::size_t>(h)] + p[b1 + h]);
  std::vector<double> u2(static_cast<std::size_t>(L.Hv), 0.0);
  matvec(p + w2, L.Hv, L.Hv, u1.data(), u2.data());
  for (int h = 0; h < L.Hv; ++h)
    u2[static_cast<std::size_t>(h)] = std::tanh(u2[static_cast<std::size_t>(h)] + p[b2 + h]);
  std::vector<double> out(static_cast<std::size_t>(out_dim), 0.0);
  matvec(p + w3, out_dim, L.Hv, u2.data(), out.data());
  for (int c = 0; c < out_dim; ++c)
    out[static_cast<std::size_t>(c)] += p[b3 + c];
  return out;
}

std::vector<double> PolicyNet::value_checked(const Observation& obs, ValueHeadKind head,
                                             const GranularitySpec& spec) const {
  bool want_vector = spec.value_level == Level::Action;
  if ((head == ValueHeadKind::Vector) != want_vector)
    throw HeadMismatch(std::string("value head disagrees with value_level=") +
                       level_name(spec.value_level));
  return value(obs, head);
}

void PolicyNet::accumulate_chunk_gradient(const Observation& obs, const ActionChunk& chunk,
                                          std::span<const double> coeff_logprob,
                                          std::span<const double> coeff_entropy,
                                          std::vector<double>& grad) const {
  const Layout& L = layout();
  if (grad.size() != params_.size())
    throw LengthMismatch("gradient buffer size mismatch");
  if (static_cast<int>(coeff_logprob.size()) != L.P ||
      static_cast<int>(coeff_entropy.size()) != L.P)
    throw LengthMismatch("coefficient length must be C*M");

  std::vector<int> prefix;
  prefix.reserve(static_cast<std::size_t>(L.P));
  TrunkCache cache;
  for (int pos = 0; pos < L.P; ++pos) {
    int tok = chunk.actions[static_cast<std::size_t>(pos / desc_.M)]
                  .tokens[static_cast<std::size_t>(pos % desc_.M)];
    double klp = coeff_logprob[static_cast<std::size_t>(pos)];
    double kent = coeff_entropy[static_cast<std::size_t>(pos)];
    if (klp == 0.0 && kent == 0.0) {
      prefix.push_back(tok);
      continue;
    }
    if (!std::isfinite(klp) || !std::isfinite(kent))
      throw NonFinite("non-finite gradient coefficient");

    trunk_forward(obs, prefix, cache);
    const std::vector<double>& f = cache.hidden.empty() ? cache.x : cache.hidden.back();
    std::vector<double> ls = log_softmax(logits_from_feature(f));

    // dlogprob/dlogit_v = [v==tok] - p_v ; dentropy/dlogit_v = -p_v(ls_v + H)
    std::vector<double> dlogits(static_cast<std::size_t>(L.V), 0.0);
    double H = 0.0;
    if (kent != 0.0)
      for (int v = 0; v < L.V; ++v)
        H -= std::exp(ls[static_cast<std::size_t>(v)]) * ls[static_cast<std::size_t>(v)];
    for (int v = 0; v < L.V; ++v) {
      double pv = std::exp(ls[static_cast<std::size_t>(v)]);
      double d = klp * ((v == tok ? 1.0 : 0.0) - pv);
      if (kent != 0.0)
        d += kent * (-pv * (ls[static_cast<std::size_t>(v)] + H));
      dlogits[static_cast<std::size_t>(v)] = d;
    }

    outer_add(grad.data() + L.w_pol, grad.data() + L.b_pol, L.V, L.H, dlogits.data(),
              f.data());
    std::vector<double> d_feature(static_cast<std::size_t>(L.H), 0.0);
    matvec_transpose_add(params_.data() + L.w_pol, L.V, L.H, dlogits.data(),
                         d_feature.data());
    trunk_backward(obs, prefix, cache, std::move(d_feature), grad);
    prefix.push_back(tok);
  }
}

void PolicyNet::accumulate_value_gradient(const Observation& obs, ValueHeadKind head,
                                          std::span<const double> coeff,
                                          std::vector<double>& grad) const {
  const Layout& L = layout();
  if (grad.size() != params_.size())
    throw LengthMismatch("gradient buffer size mismatch");
  int out_dim = head == ValueHeadKind::Scalar ? 1 : L.C;
  if (static_cast<int>(coeff.size()) != out_dim)
    throw LengthMismatch("value coefficient length mismatch");
  bool any = false;
  for (double c : coeff) {
    if (!std::isfinite(c))
      throw NonFinite("non-finite value coefficient");
    any = any || c != 0.0;
  }
  if (!any)
    return;

  std::size_t w1 = head == ValueHeadKind::Scalar ? L.v1_w : L.c1_w;
  std::size_t b1 = head == ValueHeadKind::Scalar ? L.v1_b : L.c1_b;
  std::size_t w2 = head == ValueHeadKind::Scalar ? L.v2_w : L.c2_w;
  std::size_t b2 = head == ValueHeadKind::Scalar ? L.v2_b : L.c2_b;
  std::size_t w3 = head == ValueHeadKind::Scalar ? L.v3_w : L.c3_w;
  std::size_t b3 = head == ValueHeadKind::Scalar ? L.v3_b : L.c3_b;

  TrunkCache cache;
  trunk_forward(obs, {}, cache);
  const std::vector<double>& f = cache.hidden.empty() ? cache.x : cache.hidden.back();
  const double* p = params_.data();

  std::vector<double> u1(static_cast<std::size_t>(L.Hv), 0.0);
  matvec(p + w1, L.Hv, L.H, f.data(), u1.data());
  for (int h = 0; h < L.Hv; ++h)
    u1[static_cast<std::size_t>(h)] = std::tanh(u1[static_cast<std::size_t>(h)] + p[b1 + h]);
  std::vector<double> u2(static_cast<std::size_t>(L.Hv), 0.0);
  matvec(p + w2, L.Hv, L.Hv, u1.data(), u2.data());
  for (int h = 0; h < L.Hv; ++h)
    u2[static_cast<std::size_t>(h)] = std::tanh(u2[static_cast<std::size_t>(h)] + p[b2 + h]);

  double* g = grad.data();
  outer_add(g + w3, g + b3, out_dim, L.Hv, coeff.data(), u2.data());
  std::vector<double> du2(static_cast<std::size_t>(L.Hv), 0.0);
  matvec_transpose_add(p + w3, out_dim, L.Hv, coeff.data(), du2.data());
  for (int h = 0; h < L.Hv; ++h) {
    double a = u2[static_cast<std::size_t>(h)];
    du2[static_cast<std::size_t>(h)] *= (1.0 - a * a);
  }
  outer_add(g + w2, g + b2, L.Hv, L.Hv, du2.data(), u1.data());
  std::vector<double> du1(static_cast<std::size_t>(L.Hv), 0.0);
  matvec_transpose_add(p + w2, L.Hv, L.Hv, du2.data(), du1.data());
  for (int h = 0; h < L.Hv; ++h) {
    double a = u1[static_cast<std::size_t>(h)];
    du1[static_cast<std::size_t>(h)] *= (1.0 - a * a);
  }
  outer_add(g + w1, g + b1, L.Hv, L.H, du1.data(), f.data());
  std::vector<double> d_feature(static_cast<std::size_t>(L.H), 0.0);
  matvec_transpose_add(p + w1, L.Hv, L.H, du1.data(), d_feature.data());
  trunk_backward(obs, {}, cache, std::move(d_feature), grad);
}

} // namespace chunkrl::policy
