#include "emofuse/taxonomy.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "emofuse/error.hpp"

namespace emofuse {

std::string_view to_string(Polarity p) {
  return p == Polarity::positive ? "positive" : "negative";
}

Polarity polarity_from_string(std::string_view s) {
  if (s == "positive") return Polarity::positive;
  if (s == "negative") return Polarity::negative;
  throw ParseError("unknown polarity '" + std::string(s) + "'");
}

Taxonomy::Taxonomy(std::vector<std::string> names, std::vector<Polarity> polarities) {
  if (names.empty()) throw ParseError("taxonomy: empty emotion list");
  if (names.size() != polarities.size()) {
    throw ParseError("taxonomy: every emotion needs exactly one polarity");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) throw ParseError("taxonomy: empty emotion name");
    if (!seen.insert(names[i]).second) {
      throw ParseError("taxonomy: duplicate emotion '" + names[i] + "'");
    }
    emotions_.push_back(Emotion{i, std::move(names[i])});
    (polarities[i] == Polarity::positive ? positive_ : negative_).push_back(i);
  }
  if (positive_.empty() || negative_.empty()) {
    throw ParseError("taxonomy: each polarity needs at least one emotion");
  }
  polarity_ = std::move(polarities);
}

const std::string& Taxonomy::name_of(std::size_t index) const {
  if (index >= emotions_.size()) throw std::out_of_range("unknown emotion index");
  return emotions_[index].name;
}

Polarity Taxonomy::polarity_of(std::size_t index) const {
  if (index >= polarity_.size()) throw std::out_of_range("unknown emotion index");
  return polarity_[index];
}

std::size_t Taxonomy::index_of(std::string_view name) const {
  auto it = std::find_if(emotions_.begin(), emotions_.end(),
                         [&](const Emotion& e) { return e.name == name; });
  if (it == emotions_.end()) throw std::out_of_range("unknown emotion '" + std::string(name) + "'");
  return it->index;
}

bool Taxonomy::contains(std::string_view name) const {
  return std::any_of(emotions_.begin(), emotions_.end(),
                     [&](const Emotion& e) { return e.name == name; });
}

std::uint64_t Taxonomy::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (std::size_t i = 0; i < emotions_.size(); ++i) {
    for (char ch : emotions_[i].name) mix(static_cast<unsigned char>(ch));
    mix(0);
    mix(static_cast<unsigned char>(polarity_[i]));
  }
  return h;
}

Taxonomy mikel_default() {
  using enum Polarity;
  return Taxonomy({"excitement", "amusement", "contentment", "awe", "sad", "fear", "disgust", "anger"},
                  {positive, positive, positive, positive, negative, negative, negative, negative});
}

Taxonomy emotion_roi_default() {
  using enum Polarity;
  return Taxonomy({"anger", "disgust", "fear", "joy", "sad", "surprise"},
                  {negative, negative, negative, positive, negative, positive});
}

Polarity polarity_of(const Taxonomy& t, std::size_t index) { return t.polarity_of(index); }

IndexPartition partition_indices(const Taxonomy& t) {
  return IndexPartition{t.positive_indices(), t.negative_indices()};
}

Taxonomy taxonomy_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("emotions") || !j["emotions"].is_array()) {
    throw ParseError("taxonomy: expected an object with an \"emotions\" array");
  }
  std::vector<std::string> names;
  std::vector<Polarity> polarities;
  for (const auto& e : j["emotions"]) {
    if (!e.is_object() || !e.contains("name") || !e["name"].is_string()) {
      throw ParseError("taxonomy: emotion entry without a name");
    }
    if (!e.contains("polarity") || !e["polarity"].is_string()) {
      throw ParseError("taxonomy: missing polarity for '" + e["name"].get<std::string>() + "'");
    }
    names.push_back(e["name"].get<std::string>());
    polarities.push_back(polarity_from_string(e["polarity"].get<std::string>()));
  }
  return Taxonomy(std::move(names), std::move(polarities));
}

Taxonomy load_taxonomy(std::string_view config_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("taxonomy: ") + e.what());
  }
  return taxonomy_from_json(j);
}

nlohmann::json taxonomy_to_json(const Taxonomy& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : t.emotions()) {
    arr.push_back({{"name", e.name}, {"polarity", std::string(to_string(t.polarity_of(e.index)))}});
  }
  return nlohmann::json{{"emotions", std::move(arr)}};
}

std::string serialize_taxonomy(const Taxonomy& t) { return taxonomy_to_json(t).dump(); }

Taxonomy resolve_taxonomy(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "mikel") return mikel_default();
    if (name == "emotion_roi" || name == "emotionroi") return emotion_roi_default();
    throw ParseError("taxonomy: unknown preset '" + name + "'");
  }
  return taxonomy_from_json(j);
}

}  // namespace emofuse
