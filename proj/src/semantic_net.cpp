#include "emofuse/semantic_net.hpp"

#include <cmath>
#include <stdexcept>

#include "emofuse/kernels.hpp"
#include "emofuse/ops.hpp"
#include "emofuse/rng.hpp"

namespace emofuse {

LstmParams::LstmParams(const std::string& prefix, std::size_t input_size, std::size_t hidden_size)
    : input(input_size),
      hidden(hidden_size),
      Wx(prefix + ".Wx", Tensor::zeros(4 * hidden_size, input_size)),
      Wh(prefix + ".Wh", Tensor::zeros(4 * hidden_size, hidden_size)),
      b(prefix + ".b", Tensor::zeros(4 * hidden_size)) {}

void LstmParams::init(Rng& rng) {
  const std::size_t fan_in = input + hidden;
  init_uniform_fan_in(Wx.value, fan_in, rng);
  init_uniform_fan_in(Wh.value, fan_in, rng);
  init_uniform_fan_in(b.value, fan_in, rng);
  for (std::size_t k = hidden; k < 2 * hidden; ++k) b.value[k] = 1.0;
}

LstmState lstm_step(const LstmParams& p, std::span<const double> x, const LstmState& s, LstmCache* cache) {
  const std::size_t H = p.hidden;
  require_shape(x.size() == p.input, "lstm_step: input length " + std::to_string(x.size()) + " != " +
                                         std::to_string(p.input));
  require_shape(s.h.size() == H && s.c.size() == H, "lstm_step: state width mismatch");

  Vec pre(4 * H);
  Vec rec(4 * H);
  kernels::matvec(p.Wx.value.data(), 4 * H, p.input, x, pre);
  kernels::matvec(p.Wh.value.data(), 4 * H, H, s.h, rec);
  kernels::add(rec, pre);
  kernels::add(p.b.value.data(), pre);

  const std::span<const double> all(pre);
  Vec in_gate = sigmoid_map(all.subspan(0, H));
  Vec forget_gate = sigmoid_map(all.subspan(H, H));
  Vec candidate = tanh_map(all.subspan(2 * H, H));
  Vec out_gate = sigmoid_map(all.subspan(3 * H, H));

  LstmState next{Vec(H), Vec(H)};
  for (std::size_t k = 0; k < H; ++k) next.c[k] = forget_gate[k] * s.c[k] + in_gate[k] * candidate[k];
  Vec tanh_c = tanh_map(next.c);
  for (std::size_t k = 0; k < H; ++k) next.h[k] = out_gate[k] * tanh_c[k];

  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev = s.h;
    cache->c_prev = s.c;
    cache->in_gate = std::move(in_gate);
    cache->forget_gate = std::move(forget_gate);
    cache->candidate = std::move(candidate);
    cache->out_gate = std::move(out_gate);
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

void lstm_step_backward(LstmParams& p, const LstmCache& cache, std::span<const double> grad_h,
                        std::span<const double> grad_c, std::span<double> grad_x, std::span<double> grad_h_prev,
                        std::span<double> grad_c_prev) {
  const std::size_t H = p.hidden;
  require_shape(grad_h.size() == H && grad_c.size() == H, "lstm_step_backward: gradient width mismatch");
  require_shape(cache.x.size() == p.input && cache.c.size() == H, "lstm_step_backward: cache does not match params");

  Vec dpre(4 * H);
  for (std::size_t k = 0; k < H; ++k) {
    const double i = cache.in_gate[k], f = cache.forget_gate[k], g = cache.candidate[k], o = cache.out_gate[k];
    const double tc = cache.tanh_c[k];
    const double d_out = grad_h[k] * tc;
    const double dc = grad_c[k] + grad_h[k] * o * (1.0 - tc * tc);
    dpre[k] = dc * g * i * (1.0 - i);
    dpre[H + k] = dc * cache.c_prev[k] * f * (1.0 - f);
    dpre[2 * H + k] = dc * i * (1.0 - g * g);
    dpre[3 * H + k] = d_out * o * (1.0 - o);
    if (!grad_c_prev.empty()) grad_c_prev[k] += dc * f;
  }

  kernels::outer_acc(p.Wx.grad.data(), 4 * H, p.input, dpre, cache.x);
  kernels::outer_acc(p.Wh.grad.data(), 4 * H, H, dpre, cache.h_prev);
  kernels::add(dpre, p.b.grad.data());
  if (!grad_x.empty()) kernels::matvec_t_acc(p.Wx.value.data(), 4 * H, p.input, dpre, grad_x);
  if (!grad_h_prev.empty()) kernels::matvec_t_acc(p.Wh.value.data(), 4 * H, H, dpre, grad_h_prev);
}

AttentionParams::AttentionParams(std::size_t m, std::size_t f, std::size_t h)
    : M(m),
      F(f),
      H(h),
      Wf("attention.Wf", Tensor::zeros(m, f)),
      Wh("attention.Wh", Tensor::zeros(m, h)),
      omega("attention.omega", Tensor::zeros(m)) {}

void AttentionParams::init(Rng& rng) {
  init_uniform_fan_in(Wf.value, F, rng);
  init_uniform_fan_in(Wh.value, H, rng);
  init_uniform_fan_in(omega.value, M, rng);
}

namespace {

Tensor project_objects(const AttentionParams& a, const Tensor& F_s) {
  Tensor out = Tensor::zeros(F_s.rows(), a.M);
  for (std::size_t i = 0; i < F_s.rows(); ++i) {
    kernels::matvec(a.Wf.value.data(), a.M, a.F, F_s.row(i), out.row(i));
  }
  return out;
}

// Fills act (N x M) and returns the softmax weights.
Vec attend(const AttentionParams& a, const Tensor& projected, std::span<const double> h_att, Tensor& act) {
  const std::size_t N = projected.rows();
  Vec wh(a.M);
  kernels::matvec(a.Wh.value.data(), a.M, a.H, h_att, wh);
  act = Tensor::zeros(N, a.M);
  Vec scores(N);
  for (std::size_t i = 0; i < N; ++i) {
    auto row = act.row(i);
    for (std::size_t m = 0; m < a.M; ++m) row[m] = std::tanh(projected(i, m) + wh[m]);
    scores[i] = kernels::dot(a.omega.value.data(), row);
  }
  return softmax(scores);
}

void check_objects(const AttentionParams& a, const Tensor& F_s) {
  require_shape(F_s.rows() > 0, "attention: no objects");
  require_shape(F_s.cols() == a.F, "attention: object width " + std::to_string(F_s.cols()) + " != " +
                                       std::to_string(a.F));
}

}  // namespace

Vec attention_weights(const AttentionParams& a, const Tensor& F_s, std::span<const double> h_att) {
  check_objects(a, F_s);
  require_shape(h_att.size() == a.H, "attention: hidden width mismatch");
  Tensor act;
  return attend(a, project_objects(a, F_s), h_att, act);
}

SemanticNetParams::SemanticNetParams(SemanticDims d)
    : dims(d),
      att_lstm("att_lstm", d.H + d.F, d.H),
      cor_lstm("cor_lstm", d.H + d.F, d.H),
      attention(d.M, d.F, d.H) {}

void SemanticNetParams::init(Rng& rng) {
  att_lstm.init(rng);
  cor_lstm.init(rng);
  attention.init(rng);
}

std::vector<Param*> SemanticNetParams::params() {
  std::vector<Param*> out;
  for (Param* q : att_lstm.params()) out.push_back(q);
  for (Param* q : cor_lstm.params()) out.push_back(q);
  for (Param* q : attention.params()) out.push_back(q);
  return out;
}

std::pair<Vec, SemanticTrace> semantic_forward(const SemanticNetParams& p, const Tensor& F_s, std::size_t steps) {
  if (steps < 1) throw std::invalid_argument("semantic_forward: step count must be >= 1");
  const std::size_t H = p.dims.H;
  SemanticTrace trace;
  if (F_s.rows() == 0) return {Vec(H, 0.0), std::move(trace)};
  check_objects(p.attention, F_s);

  trace.objects = F_s;
  trace.f_mean = mean_rows(F_s);
  trace.projected = project_objects(p.attention, F_s);
  trace.steps.resize(steps);

  LstmState att = LstmState::zeros(H);
  LstmState cor = LstmState::zeros(H);
  for (std::size_t t = 0; t < steps; ++t) {
    SemanticStep& st = trace.steps[t];
    const Vec x_att = concat({cor.h, trace.f_mean});
    LstmState att_next = lstm_step(p.att_lstm, x_att, att, &st.att);

    st.alpha = attend(p.attention, trace.projected, att_next.h, st.act);
    st.f_att = weighted_sum(F_s, st.alpha);
    st.h_att = att_next.h;

    // The correlation LSTM sees the attention-LSTM state of the previous step.
    const Vec x_cor = concat({att.h, st.f_att});
    cor = lstm_step(p.cor_lstm, x_cor, cor, &st.cor);
    att = std::move(att_next);
  }
  return {cor.h, std::move(trace)};
}

void semantic_backward(SemanticNetParams& p, const SemanticTrace& trace, std::span<const double> grad_v_s,
                       Tensor* grad_F) {
  const std::size_t H = p.dims.H;
  const std::size_t F = p.dims.F;
  const std::size_t M = p.dims.M;
  require_shape(grad_v_s.size() == H, "semantic_backward: gradient width mismatch");
  if (trace.empty()) return;
  const std::size_t N = trace.objects.rows();
  require_shape(trace.objects.cols() == F && trace.projected.cols() == M,
                "semantic_backward: trace does not match params");
  if (grad_F) require_shape(grad_F->rows() == N && grad_F->cols() == F, "semantic_backward: grad_F shape mismatch");

  AttentionParams& attn = p.attention;
  Vec gh_cor(grad_v_s.begin(), grad_v_s.end());
  Vec gc_cor(H, 0.0);
  Vec gh_att(H, 0.0);
  Vec gc_att(H, 0.0);
  Vec g_fmean(F, 0.0);
  Tensor g_projected = Tensor::zeros(N, M);

  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    const SemanticStep& st = trace.steps[t];

    Vec gx_cor(H + F, 0.0);
    Vec gh_cor_prev(H, 0.0);
    Vec gc_cor_prev(H, 0.0);
    lstm_step_backward(p.cor_lstm, st.cor, gh_cor, gc_cor, gx_cor, gh_cor_prev, gc_cor_prev);
    const std::span<const double> gx_cor_view(gx_cor);
    const auto g_hatt_prev = gx_cor_view.subspan(0, H);
    const auto g_fatt = gx_cor_view.subspan(H, F);

    // f_att = sum_i alpha_i f_i
    Vec g_alpha(N, 0.0);
    weighted_sum_backward(trace.objects, st.alpha, g_fatt, grad_F, g_alpha);
    Vec g_scores(N, 0.0);
    softmax_backward(st.alpha, g_alpha, g_scores);

    // scores_i = omega . act_i,  act_i = tanh(projected_i + Wh h_att)
    Vec g_pre_sum(M, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      const auto act = st.act.row(i);
      kernels::axpy(g_scores[i], act, attn.omega.grad.data());
      auto g_pre = g_projected.row(i);
      for (std::size_t m = 0; m < M; ++m) {
        const double g = g_scores[i] * attn.omega.value[m] * (1.0 - act[m] * act[m]);
        g_pre[m] += g;
        g_pre_sum[m] += g;
      }
    }
    kernels::outer_acc(attn.Wh.grad.data(), M, H, g_pre_sum, st.h_att);
    kernels::matvec_t_acc(attn.Wh.value.data(), M, H, g_pre_sum, gh_att);

    Vec gx_att(H + F, 0.0);
    Vec gh_att_prev(H, 0.0);
    Vec gc_att_prev(H, 0.0);
    lstm_step_backward(p.att_lstm, st.att, gh_att, gc_att, gx_att, gh_att_prev, gc_att_prev);
    const std::span<const double> gx_att_view(gx_att);
    kernels::add(gx_att_view.subspan(H, F), g_fmean);

    gh_cor = std::move(gh_cor_prev);
    kernels::add(gx_att_view.subspan(0, H), gh_cor);
    gc_cor = std::move(gc_cor_prev);
    gh_att = std::move(gh_att_prev);
    kernels::add(g_hatt_prev, gh_att);
    gc_att = std::move(gc_att_prev);
  }

  // projected_i = Wf f_i
  for (std::size_t i = 0; i < N; ++i) {
    kernels::outer_acc(attn.Wf.grad.data(), M, F, g_projected.row(i), trace.objects.row(i));
    if (grad_F) kernels::matvec_t_acc(attn.Wf.value.data(), M, F, g_projected.row(i), grad_F->row(i));
  }
  if (grad_F) mean_rows_backward(g_fmean, *grad_F);
}

FcSemanticParams::FcSemanticParams(SemanticDims d)
    : dims(d),
      W1("fc_semantic.W1", Tensor::zeros(d.H, d.F)),
      b1("fc_semantic.b1", Tensor::zeros(d.H)),
      W2("fc_semantic.W2", Tensor::zeros(d.H, d.H)),
      b2("fc_semantic.b2", Tensor::zeros(d.H)) {}

void FcSemanticParams::init(Rng& rng) {
  init_uniform_fan_in(W1.value, dims.F, rng);
  init_uniform_fan_in(b1.value, dims.F, rng);
  init_uniform_fan_in(W2.value, dims.H, rng);
  init_uniform_fan_in(b2.value, dims.H, rng);
}

std::pair<Vec, FcSemanticTrace> fc_semantic_forward(const FcSemanticParams& p, const Tensor& F_s) {
  FcSemanticTrace trace;
  if (F_s.rows() == 0) return {Vec(p.dims.H, 0.0), std::move(trace)};
  require_shape(F_s.cols() == p.dims.F, "fc_semantic: object width mismatch");
  trace.count = F_s.rows();
  trace.f_mean = mean_rows(F_s);
  trace.hidden = tanh_map(affine(trace.f_mean, p.W1.value, &p.b1.value));
  trace.out = tanh_map(affine(trace.hidden, p.W2.value, &p.b2.value));
  return {trace.out, std::move(trace)};
}

void fc_semantic_backward(FcSemanticParams& p, const FcSemanticTrace& trace, std::span<const double> grad_v_s,
                          Tensor* grad_F) {
  require_shape(grad_v_s.size() == p.dims.H, "fc_semantic_backward: gradient width mismatch");
  if (trace.empty()) return;
  Vec g_pre2(p.dims.H, 0.0);
  tanh_backward(trace.out, grad_v_s, g_pre2);
  Vec g_hidden(p.dims.H, 0.0);
  affine_backward(trace.hidden, p.W2.value, g_pre2, g_hidden, &p.W2.grad, &p.b2.grad);
  Vec g_pre1(p.dims.H, 0.0);
  tanh_backward(trace.hidden, g_hidden, g_pre1);
  Vec g_mean(p.dims.F, 0.0);
  affine_backward(trace.f_mean, p.W1.value, g_pre1, g_mean, &p.W1.grad, &p.b1.grad);
  if (grad_F) {
    require_shape(grad_F->rows() == trace.count && grad_F->cols() == p.dims.F,
                  "fc_semantic_backward: grad_F shape mismatch");
    mean_rows_backward(g_mean, *grad_F);
  }
}

}  // namespace emofuse
