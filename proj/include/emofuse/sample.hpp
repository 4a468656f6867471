#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "emofuse/encoders.hpp"
#include "emofuse/tensor.hpp"

namespace emofuse {

/// One image's precomputed stimuli: the global vector, detected object
/// features in detector-confidence order, and the largest face if any.
struct SampleRecord {
  std::string id;
  std::string label;
  std::size_t label_index = 0;
  Vec global;
  Tensor objects = Tensor::zeros(0, 0);  // N x F
  FaceInput face;
};

using Dataset = std::vector<SampleRecord>;

}  // namespace emofuse
