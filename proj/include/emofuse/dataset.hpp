#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "emofuse/config.hpp"
#include "emofuse/rng.hpp"
#include "emofuse/sample.hpp"
#include "emofuse/taxonomy.hpp"
#include "json.hpp"

namespace emofuse {

/// JSON-lines fixture reader. Each line is exactly
/// {"id", "label", "global", "objects", "face"}; face is null or an array.
/// Object lists longer than n_max keep their first n_max entries (fixtures are
/// in detector-confidence order) and a warning is written to `warn`.
/// Throws DataError naming the offending line.
Dataset parse_jsonl(const std::string& path, const Taxonomy& taxonomy, std::size_t n_max, std::ostream& warn);
Dataset parse_jsonl_text(std::string_view text, const Taxonomy& taxonomy, std::size_t n_max, std::ostream& warn);

std::string to_jsonl(const Dataset& data);
void write_jsonl(const std::string& path, const Dataset& data);

/// Drops objects past the first n_max; returns how many records changed.
std::size_t truncate_objects(Dataset& data, std::size_t n_max);

struct Splits {
  Dataset train, val, test;
};

/// Seeded shuffle, then the first round(n * train) records train, the next
/// round(n * val) validate, and the rest test.
Splits split_dataset(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed);

/// Class-conditional Gaussian stand-in for a real emotion dataset.
struct SynthSpec {
  Taxonomy taxonomy = mikel_default();
  std::size_t train_per_class = 250;
  std::size_t test_per_class = 50;
  std::size_t global_dim = 32;
  std::size_t object_dim = 16;
  std::size_t face_dim = 24;
  /// Per-coordinate standard deviation around the class mean.
  double noise = 0.4;
  double face_prob = 0.5;
  std::size_t objects_min = 0;
  std::size_t objects_max = 15;
  /// Probability that an object is drawn from a class-independent distractor.
  double distractor_prob = 0.3;
  /// Length of the shared polarity component of every class mean.
  double polarity_scale = 1.0;
  /// Length of the class-specific component, orthogonal to the polarity one.
  double class_scale = 1.0;
  std::uint64_t seed = 42;

  /// Throws ConfigError.
  void validate() const;
};

/// Keys absent from `j` keep their defaults. Throws ConfigError.
SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json synth_spec_to_json(const SynthSpec& s);

/// Per-class means for one modality (C x dim). Classes of the same polarity
/// share a +/- polarity direction; class directions are orthogonal to it and
/// to each other when dim allows.
Tensor synth_class_means(const SynthSpec& spec, std::size_t dim, Rng& rng);

struct SynthData {
  Dataset train;
  Dataset test;
  Tensor global_means, object_means, face_means;
};

/// Records are grouped by class in taxonomy order; the same seed always gives
/// the same data.
SynthData synth_generate(const SynthSpec& spec);

}  // namespace emofuse
