#include "emofuse/encoders.hpp"

#include "emofuse/error.hpp"
#include "emofuse/kernels.hpp"
#include "emofuse/ops.hpp"
#include "emofuse/rng.hpp"

namespace emofuse {

std::string to_string(EncoderMode m) { return m == EncoderMode::passthrough ? "passthrough" : "projection"; }

EncoderMode encoder_mode_from_string(const std::string& s) {
  if (s == "projection") return EncoderMode::projection;
  if (s == "passthrough") return EncoderMode::passthrough;
  throw ConfigError("unknown encoder mode '" + s + "'");
}

EncoderParams::EncoderParams(const std::string& prefix, EncoderMode m, std::size_t raw, std::size_t out)
    : mode(m), raw_dim(raw), out_dim(out) {
  if (mode == EncoderMode::passthrough) {
    require_shape(raw == out, prefix + ": passthrough encoder needs raw width == output width");
    return;
  }
  W = Param(prefix + ".W", Tensor::zeros(out, raw));
  b = Param(prefix + ".b", Tensor::zeros(out));
}

void EncoderParams::init(Rng& rng) {
  if (mode == EncoderMode::passthrough) return;
  init_uniform_fan_in(W.value, raw_dim, rng);
  init_uniform_fan_in(b.value, raw_dim, rng);
}

std::vector<Param*> EncoderParams::params() {
  if (mode == EncoderMode::passthrough) return {};
  return {&W, &b};
}

Vec encode_global(const EncoderParams& p, std::span<const double> raw, EncoderTrace* trace) {
  require_shape(raw.size() == p.raw_dim, "encoder: raw width " + std::to_string(raw.size()) + " != " +
                                             std::to_string(p.raw_dim));
  Vec out = p.mode == EncoderMode::passthrough ? Vec(raw.begin(), raw.end())
                                               : tanh_map(affine(raw, p.W.value, &p.b.value));
  if (trace) {
    trace->raw.assign(raw.begin(), raw.end());
    trace->out = out;
    trace->active = true;
  }
  return out;
}

Vec encode_expression(const EncoderParams& p, const FaceInput& face, EncoderTrace* trace) {
  if (!face.present()) {
    if (trace) *trace = EncoderTrace{};
    return Vec(p.out_dim, 0.0);
  }
  return encode_global(p, *face.raw, trace);
}

void encoder_backward(EncoderParams& p, const EncoderTrace& trace, std::span<const double> grad_out,
                      std::span<double> grad_raw) {
  if (!trace.active) return;
  require_shape(grad_out.size() == p.out_dim, "encoder_backward: gradient width mismatch");
  if (p.mode == EncoderMode::passthrough) {
    if (!grad_raw.empty()) kernels::add(grad_out, grad_raw);
    return;
  }
  Vec g_pre(p.out_dim, 0.0);
  tanh_backward(trace.out, grad_out, g_pre);
  affine_backward(trace.raw, p.W.value, g_pre, grad_raw, &p.W.grad, &p.b.grad);
}

}  // namespace emofuse
