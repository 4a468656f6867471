#include "emofuse/head.hpp"

#include <stdexcept>

#include "emofuse/ops.hpp"

namespace emofuse {

void ClassifierParams::init(Rng& rng) { init_uniform_fan_in(W.value, fused_dim(), rng); }

Vec fuse(const FusionDims& dims, std::span<const double> v_g, std::span<const double> v_s,
         std::span<const double> v_e) {
  require_shape(v_g.size() == dims.global && v_s.size() == dims.semantic && v_e.size() == dims.expression,
                "fuse: branch widths (" + std::to_string(v_g.size()) + "," + std::to_string(v_s.size()) + "," +
                    std::to_string(v_e.size()) + ") do not match configuration");
  return concat({v_g, v_s, v_e});
}

Vec classify(const ClassifierParams& p, std::span<const double> v_emo) { return softmax(affine(v_emo, p.W.value)); }

std::array<double, 2> polarity_aggregate(const Taxonomy& t, std::span<const double> p_emo) {
  require_shape(p_emo.size() == t.size(), "polarity_aggregate: probability vector size does not match taxonomy");
  std::array<double, 2> out{0.0, 0.0};
  for (std::size_t i : t.positive_indices()) out[0] += p_emo[i];
  for (std::size_t i : t.negative_indices()) out[1] += p_emo[i];
  return out;
}

double emotion_loss(std::span<const double> p_emo, std::size_t y_emo) { return nll_from_probs(p_emo, y_emo); }

double polarity_loss(const Taxonomy& t, std::span<const double> p_emo, Polarity y_pol) {
  const auto p_pol = polarity_aggregate(t, p_emo);
  return nll_from_probs(p_pol, static_cast<std::size_t>(y_pol));
}

LossBreakdown hierarchical_loss(const Taxonomy& t, std::span<const double> p_emo, std::size_t y_emo, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("hierarchical_loss: lambda must be >= 0");
  LossBreakdown out;
  out.emotion = emotion_loss(p_emo, y_emo);
  out.polarity = polarity_loss(t, p_emo, t.polarity_of(y_emo));
  out.lambda = lambda;
  // lambda = 0 reduces to plain cross-entropy, bit for bit.
  out.total = lambda == 0.0 ? out.emotion : out.emotion + lambda * out.polarity;
  return out;
}

void hierarchical_loss_backward(const Taxonomy& t, std::span<const double> p_emo, std::size_t y_emo, double lambda,
                                double scale, std::span<double> grad_p) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("hierarchical_loss: lambda must be >= 0");
  nll_backward(p_emo, y_emo, scale, grad_p);
  if (lambda == 0.0) return;
  const Polarity y_pol = t.polarity_of(y_emo);
  const auto p_pol = polarity_aggregate(t, p_emo);
  std::array<double, 2> g_pol{0.0, 0.0};
  nll_backward(p_pol, static_cast<std::size_t>(y_pol), scale * lambda, g_pol);
  const double g = g_pol[static_cast<std::size_t>(y_pol)];
  for (std::size_t i : t.indices_of(y_pol)) grad_p[i] += g;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

}  // namespace emofuse
