#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emofuse/model.hpp"

// Versioned binary model file, all integers and doubles little-endian:
//
//   char[8]  magic "EMOFUSE\x01"
//   u32      format version (1)
//   u64      taxonomy fingerprint
//   u32 len, bytes   taxonomy JSON
//   u32 x 13 C, raw_global, raw_face, d1, d2, d3, H, M, F,
//            semantic kind (0 lstm, 1 fc), encoder mode (0 projection, 1 passthrough),
//            n_max, t_steps
//   f64      lambda
//   u32      parameter count, then per parameter in Model::params() order:
//            u32 len, name bytes, u8 rank, u32 rows, u32 cols, f64[rows*cols]

namespace emofuse {

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const Model& model);
/// Throws ModelMismatchError on a malformed or inconsistent blob.
Model deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace emofuse
