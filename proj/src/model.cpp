#include "emofuse/model.hpp"

#include "emofuse/ops.hpp"
#include "emofuse/rng.hpp"

namespace emofuse {

ModelSpec ModelSpec::from_config(const TrainConfig& c, std::size_t raw_global, std::size_t raw_face) {
  ModelSpec s;
  s.taxonomy = c.taxonomy;
  s.dims = c.dims;
  s.raw_global = raw_global;
  s.raw_face = raw_face;
  s.semantic = c.semantic;
  s.encoder = c.encoder;
  s.n_max = c.n_max;
  s.t_steps = c.t_steps;
  s.lambda = c.lambda;
  return s;
}

Model::Model(ModelSpec spec)
    : global_encoder("global_encoder", spec.encoder, spec.raw_global, spec.dims.d1),
      expression_encoder("expression_encoder", spec.encoder, spec.raw_face, spec.dims.d3),
      classifier(spec.taxonomy.size(), spec.dims.d1 + spec.dims.d2 + spec.dims.d3),
      spec_(std::move(spec)) {
  const SemanticDims sd{spec_.dims.F, spec_.dims.H, spec_.dims.M};
  require_shape(spec_.dims.d2 == spec_.dims.H, "model: d2 must equal H");
  if (spec_.semantic == SemanticKind::lstm) {
    semantic_net = SemanticNetParams(sd);
  } else {
    fc_semantic = FcSemanticParams(sd);
  }
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out = global_encoder.params();
  for (Param* p : spec_.semantic == SemanticKind::lstm ? semantic_net.params() : fc_semantic.params()) {
    out.push_back(p);
  }
  for (Param* p : expression_encoder.params()) out.push_back(p);
  out.push_back(&classifier.W);
  return out;
}

std::vector<const Param*> Model::params() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<Model*>(this)->params()) out.push_back(p);
  return out;
}

void Model::init(std::uint64_t seed) {
  Rng rng(seed);
  global_encoder.init(rng);
  if (spec_.semantic == SemanticKind::lstm) {
    semantic_net.init(rng);
  } else {
    fc_semantic.init(rng);
  }
  expression_encoder.init(rng);
  classifier.init(rng);
  zero_grad();
}

void Model::zero_grad() {
  for (Param* p : params()) p->zero_grad();
}

FusionDims Model::fusion_dims() const { return {spec_.dims.d1, spec_.dims.d2, spec_.dims.d3}; }

std::size_t Model::steps_for(std::size_t objects) const {
  if (spec_.t_steps > 0) return spec_.t_steps;
  return objects > 0 ? objects : 1;
}

Vec Model::forward(const SampleRecord& s, ForwardCache* cache) const {
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  const Vec v_g = encode_global(global_encoder, s.global, &c.global);
  Vec v_s;
  if (spec_.semantic == SemanticKind::lstm) {
    auto [out, trace] = semantic_forward(semantic_net, s.objects, steps_for(s.objects.rows()));
    v_s = std::move(out);
    c.semantic = std::move(trace);
  } else {
    auto [out, trace] = fc_semantic_forward(fc_semantic, s.objects);
    v_s = std::move(out);
    c.fc_semantic = std::move(trace);
  }
  const Vec v_e = encode_expression(expression_encoder, s.face, &c.expression);
  c.v_emo = fuse(fusion_dims(), v_g, v_s, v_e);
  c.p_emo = classify(classifier, c.v_emo);
  return c.p_emo;
}

void Model::backward(const ForwardCache& cache, std::span<const double> grad_p_emo) {
  Vec g_logits(cache.p_emo.size(), 0.0);
  softmax_backward(cache.p_emo, grad_p_emo, g_logits);
  Vec g_emo(cache.v_emo.size(), 0.0);
  affine_backward(cache.v_emo, classifier.W.value, g_logits, g_emo, &classifier.W.grad, nullptr);

  const auto& d = spec_.dims;
  const std::span<const double> g(g_emo);
  encoder_backward(global_encoder, cache.global, g.subspan(0, d.d1));
  if (spec_.semantic == SemanticKind::lstm) {
    semantic_backward(semantic_net, cache.semantic, g.subspan(d.d1, d.d2), nullptr);
  } else {
    fc_semantic_backward(fc_semantic, cache.fc_semantic, g.subspan(d.d1, d.d2), nullptr);
  }
  encoder_backward(expression_encoder, cache.expression, g.subspan(d.d1 + d.d2, d.d3));
}

LossBreakdown Model::loss_and_backward(const SampleRecord& s, double lambda, double scale) {
  ForwardCache cache;
  forward(s, &cache);
  const LossBreakdown loss = hierarchical_loss(spec_.taxonomy, cache.p_emo, s.label_index, lambda);
  Vec g_p(cache.p_emo.size(), 0.0);
  hierarchical_loss_backward(spec_.taxonomy, cache.p_emo, s.label_index, lambda, scale, g_p);
  backward(cache, g_p);
  return loss;
}

}  // namespace emofuse
