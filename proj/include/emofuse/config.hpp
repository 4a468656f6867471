#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "emofuse/encoders.hpp"
#include "emofuse/taxonomy.hpp"
#include "json.hpp"

namespace emofuse {

/// Branch widths. d2 is the semantic vector width and must equal H.
struct ModelDims {
  std::size_t d1 = 64;
  std::size_t d2 = 32;
  std::size_t d3 = 32;
  std::size_t H = 32;
  std::size_t M = 16;
  std::size_t F = 16;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

enum class SemanticKind { lstm, fc };
std::string to_string(SemanticKind k);
SemanticKind semantic_kind_from_string(const std::string& s);

struct SplitFractions {
  double train = 0.80;
  double val = 0.05;
  double test = 0.15;
};

struct TrainConfig {
  double lambda = 1.0;
  std::size_t n_max = 10;
  /// Recurrent steps of the semantic branch; 0 means one step per object.
  std::size_t t_steps = 0;
  ModelDims dims;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  std::size_t epochs = 50;
  double lr = 5e-5;
  double weight_decay = 5e-5;
  std::size_t decay_every = 5;
  double decay_factor = 0.1;
  SplitFractions split;
  Taxonomy taxonomy = mikel_default();
  SemanticKind semantic = SemanticKind::lstm;
  EncoderMode encoder = EncoderMode::projection;
  /// false: weight decay is added to the gradient before the Adam moments.
  bool decoupled_weight_decay = false;

  /// Optimizer settings from the reference fine-tuning recipe.
  static TrainConfig reference();
  /// Desk-scale preset for training from scratch on synthetic data.
  static TrainConfig synthetic();

  /// Throws ConfigError.
  void validate() const;
};

/// Keys absent from `j` keep their value from `base`; unknown keys are
/// rejected. Throws ConfigError.
TrainConfig config_from_json(const nlohmann::json& j, const TrainConfig& base = TrainConfig::reference());
nlohmann::json config_to_json(const TrainConfig& c);
TrainConfig load_config(const std::string& path, const TrainConfig& base = TrainConfig::reference());

}  // namespace emofuse
