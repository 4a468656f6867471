#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emofuse/tensor.hpp"

// Stand-ins for the global and expression backbones: each maps a raw stimulus
// vector to a fixed-width branch feature.

namespace emofuse {

class Rng;

enum class EncoderMode { projection, passthrough };

std::string to_string(EncoderMode m);
EncoderMode encoder_mode_from_string(const std::string& s);

struct EncoderParams {
  EncoderMode mode = EncoderMode::projection;
  std::size_t raw_dim = 0;
  std::size_t out_dim = 0;
  Param W;  // out x raw (unused in passthrough)
  Param b;  // out

  EncoderParams() = default;
  /// Passthrough requires raw_dim == out_dim (ShapeError otherwise).
  EncoderParams(const std::string& prefix, EncoderMode mode, std::size_t raw_dim, std::size_t out_dim);

  void init(Rng& rng);
  /// Passthrough encoders own no trainable parameters.
  std::vector<Param*> params();
};

/// Raw face vector, present or not.
struct FaceInput {
  std::optional<Vec> raw;
  bool present() const { return raw.has_value(); }
};

struct EncoderTrace {
  Vec raw;
  Vec out;
  bool active = false;  // false for an absent face
};

/// projection: tanh(W raw + b); passthrough: raw.
Vec encode_global(const EncoderParams& p, std::span<const double> raw, EncoderTrace* trace = nullptr);

/// Absent face -> zero vector of out_dim, with an inactive trace.
Vec encode_expression(const EncoderParams& p, const FaceInput& face, EncoderTrace* trace = nullptr);

/// No-op for passthrough encoders and inactive traces.
void encoder_backward(EncoderParams& p, const EncoderTrace& trace, std::span<const double> grad_out,
                      std::span<double> grad_raw = {});

}  // namespace emofuse
