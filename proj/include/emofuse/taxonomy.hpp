#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace emofuse {

enum class Polarity : std::uint8_t { positive = 0, negative = 1 };

std::string_view to_string(Polarity p);
Polarity polarity_from_string(std::string_view s);

struct Emotion {
  std::size_t index = 0;
  std::string name;

  friend bool operator==(const Emotion&, const Emotion&) = default;
};

/// Ordered emotion categories plus the positive/negative partition used to
/// aggregate emotion probabilities into polarity probabilities.
///
/// Immutable after construction.
class Taxonomy {
 public:
  /// Throws ParseError on empty list, duplicate names, or a polarity left empty.
  Taxonomy(std::vector<std::string> names, std::vector<Polarity> polarities);

  std::size_t size() const { return emotions_.size(); }
  const std::vector<Emotion>& emotions() const { return emotions_; }
  const std::string& name_of(std::size_t index) const;

  /// Throws std::out_of_range("unknown emotion index").
  Polarity polarity_of(std::size_t index) const;

  /// Returns the index of `name`, or throws std::out_of_range.
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;

  /// Order-preserving index sets; disjoint and covering [0, size()).
  const std::vector<std::size_t>& positive_indices() const { return positive_; }
  const std::vector<std::size_t>& negative_indices() const { return negative_; }
  const std::vector<std::size_t>& indices_of(Polarity p) const {
    return p == Polarity::positive ? positive_ : negative_;
  }

  /// FNV-1a over names and polarities in index order.
  std::uint64_t fingerprint() const;

  friend bool operator==(const Taxonomy& a, const Taxonomy& b) {
    return a.emotions_ == b.emotions_ && a.polarity_ == b.polarity_;
  }

 private:
  std::vector<Emotion> emotions_;
  std::vector<Polarity> polarity_;
  std::vector<std::size_t> positive_;
  std::vector<std::size_t> negative_;
};

/// Mikel's wheel, positives first:
/// [excitement, amusement, contentment, awe, sad, fear, disgust, anger].
Taxonomy mikel_default();

/// EmotionROI's six classes with joy and surprise positive.
Taxonomy emotion_roi_default();

Polarity polarity_of(const Taxonomy& t, std::size_t index);

struct IndexPartition {
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
};
IndexPartition partition_indices(const Taxonomy& t);

/// Parses {"emotions":[{"name":..., "polarity":"positive"|"negative"}, ...]}.
Taxonomy load_taxonomy(std::string_view config_text);
Taxonomy taxonomy_from_json(const nlohmann::json& j);
nlohmann::json taxonomy_to_json(const Taxonomy& t);
std::string serialize_taxonomy(const Taxonomy& t);

/// Resolves a config "taxonomy" value: a preset name ("mikel", "emotion_roi")
/// or an inline taxonomy object.
Taxonomy resolve_taxonomy(const nlohmann::json& j);

}  // namespace emofuse
