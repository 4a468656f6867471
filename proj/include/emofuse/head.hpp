#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "emofuse/taxonomy.hpp"
#include "emofuse/tensor.hpp"

// Fusion, emotion classifier, polarity aggregation and the hierarchical
// cross-entropy loss L = L_emo + lambda * L_pol.

namespace emofuse {

class Rng;

/// Bias-free linear classifier over the fused feature.
struct ClassifierParams {
  Param W;  // C x (d1 + d2 + d3)

  ClassifierParams() = default;
  ClassifierParams(std::size_t classes, std::size_t fused_dim)
      : W("classifier.W", Tensor::zeros(classes, fused_dim)) {}
  void init(Rng& rng);
  std::size_t classes() const { return W.value.rows(); }
  std::size_t fused_dim() const { return W.value.cols(); }
};

struct FusionDims {
  std::size_t global = 0, semantic = 0, expression = 0;
  std::size_t total() const { return global + semantic + expression; }
};

/// [v_g, v_s, v_e]; ShapeError when a part has the wrong width.
Vec fuse(const FusionDims& dims, std::span<const double> v_g, std::span<const double> v_s,
         std::span<const double> v_e);

/// softmax(W v_emo).
Vec classify(const ClassifierParams& p, std::span<const double> v_emo);

/// Index 0 positive, index 1 negative; each a left-to-right sum over the
/// taxonomy's index set.
std::array<double, 2> polarity_aggregate(const Taxonomy& t, std::span<const double> p_emo);

double emotion_loss(std::span<const double> p_emo, std::size_t y_emo);
double polarity_loss(const Taxonomy& t, std::span<const double> p_emo, Polarity y_pol);

struct LossBreakdown {
  double emotion = 0.0;
  double polarity = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};

/// y_pol = polarity_of(y_emo). Throws std::invalid_argument for lambda < 0.
LossBreakdown hierarchical_loss(const Taxonomy& t, std::span<const double> p_emo, std::size_t y_emo, double lambda);

/// d(scale * L_total)/d p_emo, accumulated into grad_p.
void hierarchical_loss_backward(const Taxonomy& t, std::span<const double> p_emo, std::size_t y_emo, double lambda,
                                double scale, std::span<double> grad_p);

/// Lowest index wins ties.
std::size_t argmax(std::span<const double> v);

}  // namespace emofuse
