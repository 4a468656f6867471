#include "emofuse/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "emofuse/error.hpp"

namespace emofuse {

std::string to_string(SemanticKind k) { return k == SemanticKind::fc ? "fc" : "lstm"; }

SemanticKind semantic_kind_from_string(const std::string& s) {
  if (s == "lstm") return SemanticKind::lstm;
  if (s == "fc") return SemanticKind::fc;
  throw ConfigError("unknown semantic_net '" + s + "' (expected lstm or fc)");
}

TrainConfig TrainConfig::reference() { return TrainConfig{}; }

TrainConfig TrainConfig::synthetic() {
  TrainConfig c;
  c.lr = 3e-3;
  return c;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be a finite value >= 0");
  if (dims.d1 == 0 || dims.d2 == 0 || dims.d3 == 0 || dims.H == 0 || dims.M == 0 || dims.F == 0) {
    fail("all dims must be positive");
  }
  if (dims.d2 != dims.H) fail("dims.d2 must equal dims.H (the semantic vector is the last hidden state)");
  if (batch_size == 0) fail("batch_size must be positive");
  if (epochs == 0) fail("epochs must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail("lr must be >= 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) fail("weight_decay must be >= 0");
  if (decay_every == 0) fail("decay_every must be positive");
  if (!(decay_factor > 0.0) || !std::isfinite(decay_factor)) fail("decay_factor must be positive");
  const double s = split.train + split.val + split.test;
  if (split.train <= 0.0 || split.val < 0.0 || split.test < 0.0 || std::abs(s - 1.0) > 1e-9) {
    fail("split fractions must be non-negative, train > 0, and sum to 1");
  }
}

namespace {

template <class T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

std::size_t get_count(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("config: '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("config: unknown key '" + where + key + "'");
  }
}

}  // namespace

TrainConfig config_from_json(const nlohmann::json& j, const TrainConfig& base) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j,
                 {"lambda", "n_max", "t_steps", "dims", "batch_size", "seed", "epochs", "lr", "weight_decay",
                  "decay_every", "decay_factor", "split", "taxonomy", "semantic_net", "encoder",
                  "decoupled_weight_decay"},
                 "");
  TrainConfig c = base;
  if (j.contains("lambda")) c.lambda = get_as<double>(j, "lambda");
  if (j.contains("n_max")) c.n_max = get_count(j, "n_max");
  if (j.contains("t_steps")) c.t_steps = get_count(j, "t_steps");
  if (j.contains("batch_size")) c.batch_size = get_count(j, "batch_size");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("epochs")) c.epochs = get_count(j, "epochs");
  if (j.contains("lr")) c.lr = get_as<double>(j, "lr");
  if (j.contains("weight_decay")) c.weight_decay = get_as<double>(j, "weight_decay");
  if (j.contains("decay_every")) c.decay_every = get_count(j, "decay_every");
  if (j.contains("decay_factor")) c.decay_factor = get_as<double>(j, "decay_factor");
  if (j.contains("decoupled_weight_decay")) c.decoupled_weight_decay = get_as<bool>(j, "decoupled_weight_decay");
  if (j.contains("semantic_net")) c.semantic = semantic_kind_from_string(get_as<std::string>(j, "semantic_net"));
  if (j.contains("encoder")) c.encoder = encoder_mode_from_string(get_as<std::string>(j, "encoder"));
  if (j.contains("dims")) {
    const auto& d = j.at("dims");
    if (!d.is_object()) throw ConfigError("config: 'dims' must be an object");
    reject_unknown(d, {"d1", "d2", "d3", "H", "M", "F"}, "dims.");
    if (d.contains("d1")) c.dims.d1 = get_count(d, "d1");
    if (d.contains("d2")) c.dims.d2 = get_count(d, "d2");
    if (d.contains("d3")) c.dims.d3 = get_count(d, "d3");
    if (d.contains("H")) c.dims.H = get_count(d, "H");
    if (d.contains("M")) c.dims.M = get_count(d, "M");
    if (d.contains("F")) c.dims.F = get_count(d, "F");
  }
  if (j.contains("split")) {
    const auto& s = j.at("split");
    if (!s.is_object()) throw ConfigError("config: 'split' must be an object");
    reject_unknown(s, {"train", "val", "test"}, "split.");
    if (s.contains("train")) c.split.train = get_as<double>(s, "train");
    if (s.contains("val")) c.split.val = get_as<double>(s, "val");
    if (s.contains("test")) c.split.test = get_as<double>(s, "test");
  }
  if (j.contains("taxonomy")) {
    try {
      c.taxonomy = resolve_taxonomy(j.at("taxonomy"));
    } catch (const ParseError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return nlohmann::json{
      {"lambda", c.lambda},
      {"n_max", c.n_max},
      {"t_steps", c.t_steps},
      {"dims", {{"d1", c.dims.d1}, {"d2", c.dims.d2}, {"d3", c.dims.d3}, {"H", c.dims.H}, {"M", c.dims.M},
                {"F", c.dims.F}}},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"epochs", c.epochs},
      {"lr", c.lr},
      {"weight_decay", c.weight_decay},
      {"decay_every", c.decay_every},
      {"decay_factor", c.decay_factor},
      {"split", {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}}},
      {"taxonomy", taxonomy_to_json(c.taxonomy)},
      {"semantic_net", to_string(c.semantic)},
      {"encoder", to_string(c.encoder)},
      {"decoupled_weight_decay", c.decoupled_weight_decay},
  };
}

TrainConfig load_config(const std::string& path, const TrainConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return config_from_json(j, base);
}

}  // namespace emofuse
