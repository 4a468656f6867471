#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emofuse/config.hpp"
#include "emofuse/encoders.hpp"
#include "emofuse/head.hpp"
#include "emofuse/sample.hpp"
#include "emofuse/semantic_net.hpp"

namespace emofuse {

/// Everything needed to rebuild a model's parameter layout.
struct ModelSpec {
  Taxonomy taxonomy = mikel_default();
  ModelDims dims;
  std::size_t raw_global = 0;
  std::size_t raw_face = 0;
  SemanticKind semantic = SemanticKind::lstm;
  EncoderMode encoder = EncoderMode::projection;
  std::size_t n_max = 10;
  std::size_t t_steps = 0;
  double lambda = 1.0;

  static ModelSpec from_config(const TrainConfig& c, std::size_t raw_global, std::size_t raw_face);
};

/// Forward intermediates of one sample.
struct ForwardCache {
  EncoderTrace global, expression;
  SemanticTrace semantic;
  FcSemanticTrace fc_semantic;
  Vec v_emo;
  Vec p_emo;
};

/// Global encoder + semantic branch + expression encoder -> fusion ->
/// bias-free softmax classifier.
class Model {
 public:
  explicit Model(ModelSpec spec);

  /// Parameter order (initialization and serialization): global encoder,
  /// semantic branch, expression encoder, classifier.
  std::vector<Param*> params();
  std::vector<const Param*> params() const;

  /// Draws every parameter from Rng(seed) in params() order.
  void init(std::uint64_t seed);
  void zero_grad();

  const ModelSpec& spec() const { return spec_; }
  FusionDims fusion_dims() const;
  std::size_t steps_for(std::size_t objects) const;

  /// Returns p_emo. Throws ShapeError when the sample's widths do not match.
  Vec forward(const SampleRecord& s, ForwardCache* cache = nullptr) const;
  /// Accumulates parameter gradients from d(loss)/d(p_emo).
  void backward(const ForwardCache& cache, std::span<const double> grad_p_emo);
  /// Forward, hierarchical loss, and backward of scale * L_total.
  LossBreakdown loss_and_backward(const SampleRecord& s, double lambda, double scale);

  EncoderParams global_encoder;
  SemanticNetParams semantic_net;
  FcSemanticParams fc_semantic;
  EncoderParams expression_encoder;
  ClassifierParams classifier;

 private:
  ModelSpec spec_;
};

}  // namespace emofuse
