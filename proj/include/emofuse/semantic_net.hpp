#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emofuse/tensor.hpp"

// Semantic branch: turns a variable-size set of object features into one
// semantic vector with an attention LSTM, additive attention over the objects
// and a correlation LSTM. An alternative mean-pool + two-layer MLP branch is
// provided for the structural ablation.

namespace emofuse {

class Rng;

/// Standard LSTM cell. Gate blocks in Wx/Wh/b are stacked in the order
/// (input, forget, cell candidate, output), each H rows tall.
struct LstmParams {
  std::size_t input = 0;
  std::size_t hidden = 0;
  Param Wx;  // 4H x input
  Param Wh;  // 4H x H
  Param b;   // 4H

  LstmParams() = default;
  LstmParams(const std::string& prefix, std::size_t input_size, std::size_t hidden_size);

  /// uniform(+-1/sqrt(input + H)) everywhere, then forget-gate bias = 1.
  void init(Rng& rng);
  std::vector<Param*> params() { return {&Wx, &Wh, &b}; }
};

struct LstmState {
  Vec h;
  Vec c;
  static LstmState zeros(std::size_t hidden) { return {Vec(hidden, 0.0), Vec(hidden, 0.0)}; }
};

/// Forward intermediates of one cell step.
struct LstmCache {
  Vec x, h_prev, c_prev;
  Vec in_gate, forget_gate, candidate, out_gate;
  Vec c, tanh_c;
};

/// c' = sig(f) * c + sig(i) * tanh(g),  h' = sig(o) * tanh(c').
LstmState lstm_step(const LstmParams& p, std::span<const double> x, const LstmState& s,
                    LstmCache* cache = nullptr);

/// Accumulates into p's grads and into grad_x / grad_h_prev / grad_c_prev
/// (each may be empty to skip).
void lstm_step_backward(LstmParams& p, const LstmCache& cache, std::span<const double> grad_h,
                        std::span<const double> grad_c, std::span<double> grad_x, std::span<double> grad_h_prev,
                        std::span<double> grad_c_prev);

/// Additive attention: a_i = omega . tanh(Wf f_i + Wh h), alpha = softmax(a).
struct AttentionParams {
  std::size_t M = 0, F = 0, H = 0;
  Param Wf;     // M x F
  Param Wh;     // M x H
  Param omega;  // M

  AttentionParams() = default;
  AttentionParams(std::size_t m, std::size_t f, std::size_t h);
  void init(Rng& rng);
  std::vector<Param*> params() { return {&Wf, &Wh, &omega}; }
};

/// Throws ShapeError when F_s has no rows or the widths disagree.
Vec attention_weights(const AttentionParams& a, const Tensor& F_s, std::span<const double> h_att);

struct SemanticDims {
  std::size_t F = 0;  // object feature width
  std::size_t H = 0;  // LSTM hidden width (= semantic vector width)
  std::size_t M = 0;  // attention width
};

struct SemanticNetParams {
  SemanticDims dims;
  LstmParams att_lstm;  // input [h_cor, f_mean]
  LstmParams cor_lstm;  // input [h_att, f_att]
  AttentionParams attention;

  SemanticNetParams() = default;
  explicit SemanticNetParams(SemanticDims d);
  void init(Rng& rng);
  std::vector<Param*> params();
};

struct SemanticStep {
  LstmCache att, cor;
  Vec h_att;    // attention-LSTM output at this step
  Tensor act;   // tanh(Wf f_i + Wh h_att), N x M
  Vec alpha;    // attention weights, N
  Vec f_att;
};

struct SemanticTrace {
  Tensor objects;  // copy of F_s
  Vec f_mean;
  Tensor projected;  // Wf f_i, N x M; constant over steps
  std::vector<SemanticStep> steps;

  bool empty() const { return steps.empty(); }
};

/// Runs `steps` recurrent steps (>= 1, else std::invalid_argument) and returns
/// the last correlation-LSTM hidden state. No objects -> zero vector and an
/// empty trace. States start at zero for every call.
std::pair<Vec, SemanticTrace> semantic_forward(const SemanticNetParams& p, const Tensor& F_s, std::size_t steps);

/// Exact reverse of semantic_forward. grad_F may be null.
void semantic_backward(SemanticNetParams& p, const SemanticTrace& trace, std::span<const double> grad_v_s,
                       Tensor* grad_F);

/// Mean-pool + tanh(W2 tanh(W1 f_mean + b1) + b2), both layers H wide.
struct FcSemanticParams {
  SemanticDims dims;
  Param W1, b1, W2, b2;

  FcSemanticParams() = default;
  explicit FcSemanticParams(SemanticDims d);
  void init(Rng& rng);
  std::vector<Param*> params() { return {&W1, &b1, &W2, &b2}; }
};

struct FcSemanticTrace {
  std::size_t count = 0;
  Vec f_mean, hidden, out;
  bool empty() const { return count == 0; }
};

std::pair<Vec, FcSemanticTrace> fc_semantic_forward(const FcSemanticParams& p, const Tensor& F_s);
void fc_semantic_backward(FcSemanticParams& p, const FcSemanticTrace& trace, std::span<const double> grad_v_s,
                          Tensor* grad_F);

}  // namespace emofuse
