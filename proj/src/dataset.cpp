#include "emofuse/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "emofuse/error.hpp"
#include "emofuse/kernels.hpp"

namespace emofuse {
namespace {

Vec finite_vector(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw DataError(what + " must be an array of numbers");
  Vec out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw DataError(what + " must be an array of numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw DataError(what + " contains a non-finite value");
    out.push_back(x);
  }
  return out;
}

SampleRecord parse_record(const nlohmann::json& j, const Taxonomy& taxonomy, std::size_t n_max,
                          std::size_t& dropped) {
  static const std::set<std::string> kFields{"id", "label", "global", "objects", "face"};
  if (!j.is_object()) throw DataError("expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kFields.contains(key)) throw DataError("unexpected field '" + key + "'");
  }
  for (const auto& key : kFields) {
    if (!j.contains(key)) throw DataError("missing field '" + key + "'");
  }
  SampleRecord r;
  if (!j["id"].is_string()) throw DataError("'id' must be a string");
  r.id = j["id"].get<std::string>();
  if (!j["label"].is_string()) throw DataError("'label' must be a string");
  r.label = j["label"].get<std::string>();
  if (!taxonomy.contains(r.label)) throw DataError("unknown label '" + r.label + "'");
  r.label_index = taxonomy.index_of(r.label);
  r.global = finite_vector(j["global"], "'global'");

  const auto& objects = j["objects"];
  if (!objects.is_array()) throw DataError("'objects' must be an array of arrays");
  const std::size_t kept = std::min(objects.size(), n_max);
  dropped = objects.size() - kept;
  std::size_t width = 0;
  Vec flat;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const Vec f = finite_vector(objects[i], "'objects[" + std::to_string(i) + "]'");
    if (i == 0) width = f.size();
    if (f.size() != width) throw DataError("'objects' rows have different widths");
    if (i < kept) flat.insert(flat.end(), f.begin(), f.end());
  }
  r.objects = kept == 0 ? Tensor::zeros(0, 0) : Tensor::matrix(kept, width, std::move(flat));

  if (!j["face"].is_null()) r.face.raw = finite_vector(j["face"], "'face'");
  return r;
}

nlohmann::json record_to_json(const SampleRecord& r) {
  nlohmann::json objects = nlohmann::json::array();
  for (std::size_t i = 0; i < r.objects.rows(); ++i) {
    const auto row = r.objects.row(i);
    objects.push_back(Vec(row.begin(), row.end()));
  }
  return nlohmann::json{{"id", r.id},
                        {"label", r.label},
                        {"global", r.global},
                        {"objects", std::move(objects)},
                        {"face", r.face.present() ? nlohmann::json(*r.face.raw) : nlohmann::json(nullptr)}};
}

}  // namespace

Dataset parse_jsonl_text(std::string_view text, const Taxonomy& taxonomy, std::size_t n_max, std::ostream& warn) {
  Dataset out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      std::size_t dropped = 0;
      out.push_back(parse_record(nlohmann::json::parse(line), taxonomy, n_max, dropped));
      if (dropped > 0) {
        warn << "warning: line " << line_no << ": kept the first " << n_max << " of " << n_max + dropped
             << " objects\n";
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::domain_error& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

Dataset parse_jsonl(const std::string& path, const Taxonomy& taxonomy, std::size_t n_max, std::ostream& warn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_jsonl_text(buf.str(), taxonomy, n_max, warn);
}

std::string to_jsonl(const Dataset& data) {
  std::string out;
  for (const auto& r : data) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void write_jsonl(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << to_jsonl(data);
}

std::size_t truncate_objects(Dataset& data, std::size_t n_max) {
  std::size_t changed = 0;
  for (auto& r : data) {
    if (r.objects.rows() <= n_max) continue;
    const std::size_t width = r.objects.cols();
    const auto head = r.objects.data().subspan(0, n_max * width);
    r.objects = n_max == 0 ? Tensor::zeros(0, 0) : Tensor::matrix(n_max, width, Vec(head.begin(), head.end()));
    ++changed;
  }
  return changed;
}

Splits split_dataset(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed ^ 0x243f6a8885a308d3ULL);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const double n = static_cast<double>(data.size());
  const std::size_t n_train = std::min(data.size(), static_cast<std::size_t>(std::llround(n * fractions.train)));
  const std::size_t n_val =
      std::min(data.size() - n_train, static_cast<std::size_t>(std::llround(n * fractions.val)));
  Splits s;
  for (std::size_t k = 0; k < order.size(); ++k) {
    Dataset& dst = k < n_train ? s.train : (k < n_train + n_val ? s.val : s.test);
    dst.push_back(data[order[k]]);
  }
  return s;
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("synth: " + m); };
  if (train_per_class == 0) fail("train_per_class must be positive");
  if (global_dim == 0 || object_dim == 0 || face_dim == 0) fail("dims must be positive");
  if (!(noise > 0.0)) fail("noise must be > 0");
  if (!(face_prob >= 0.0 && face_prob <= 1.0)) fail("face_prob must be in [0, 1]");
  if (!(distractor_prob >= 0.0 && distractor_prob <= 1.0)) fail("distractor_prob must be in [0, 1]");
  if (objects_min > objects_max) fail("objects_min must not exceed objects_max");
  if (!(polarity_scale >= 0.0) || !(class_scale >= 0.0)) fail("scales must be >= 0");
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("synth: expected a JSON object");
  SynthSpec s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "taxonomy") s.taxonomy = resolve_taxonomy(v);
      else if (key == "train_per_class") s.train_per_class = v.get<std::size_t>();
      else if (key == "test_per_class") s.test_per_class = v.get<std::size_t>();
      else if (key == "global_dim") s.global_dim = v.get<std::size_t>();
      else if (key == "object_dim") s.object_dim = v.get<std::size_t>();
      else if (key == "face_dim") s.face_dim = v.get<std::size_t>();
      else if (key == "noise") s.noise = v.get<double>();
      else if (key == "face_prob") s.face_prob = v.get<double>();
      else if (key == "objects_min") s.objects_min = v.get<std::size_t>();
      else if (key == "objects_max") s.objects_max = v.get<std::size_t>();
      else if (key == "distractor_prob") s.distractor_prob = v.get<double>();
      else if (key == "polarity_scale") s.polarity_scale = v.get<double>();
      else if (key == "class_scale") s.class_scale = v.get<double>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else throw ConfigError("synth: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("synth: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json synth_spec_to_json(const SynthSpec& s) {
  return nlohmann::json{{"taxonomy", taxonomy_to_json(s.taxonomy)},
                        {"train_per_class", s.train_per_class},
                        {"test_per_class", s.test_per_class},
                        {"global_dim", s.global_dim},
                        {"object_dim", s.object_dim},
                        {"face_dim", s.face_dim},
                        {"noise", s.noise},
                        {"face_prob", s.face_prob},
                        {"objects_min", s.objects_min},
                        {"objects_max", s.objects_max},
                        {"distractor_prob", s.distractor_prob},
                        {"polarity_scale", s.polarity_scale},
                        {"class_scale", s.class_scale},
                        {"seed", s.seed}};
}

namespace {

// Random Gaussian direction, Gram-Schmidt against `basis`, normalized.
// Falls back to the raw direction when it lies in span(basis).
Vec orthogonal_direction(const std::vector<Vec>& basis, std::size_t dim, Rng& rng) {
  Vec v(dim);
  for (double& x : v) x = rng.normal();
  Vec raw = v;
  for (const Vec& b : basis) kernels::axpy(-kernels::dot(v, b), b, v);
  double norm = std::sqrt(kernels::dot(v, v));
  if (norm < 1e-9) {
    v = std::move(raw);
    norm = std::sqrt(kernels::dot(v, v));
  }
  for (double& x : v) x /= norm;
  return v;
}

Vec sample_around(std::span<const double> mean, double noise, Rng& rng) {
  Vec out(mean.begin(), mean.end());
  for (double& x : out) x += noise * rng.normal();
  return out;
}

}  // namespace

Tensor synth_class_means(const SynthSpec& spec, std::size_t dim, Rng& rng) {
  const std::size_t C = spec.taxonomy.size();
  std::vector<Vec> basis;
  basis.push_back(orthogonal_direction(basis, dim, rng));
  const Vec polarity_dir = basis.front();
  Tensor means = Tensor::zeros(C, dim);
  for (std::size_t c = 0; c < C; ++c) {
    if (basis.size() < dim) {
      basis.push_back(orthogonal_direction(basis, dim, rng));
    } else {
      basis.push_back(orthogonal_direction({}, dim, rng));
    }
    const double sign = spec.taxonomy.polarity_of(c) == Polarity::positive ? 1.0 : -1.0;
    auto row = means.row(c);
    kernels::axpy(sign * spec.polarity_scale, polarity_dir, row);
    kernels::axpy(spec.class_scale, basis.back(), row);
  }
  return means;
}

SynthData synth_generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t C = spec.taxonomy.size();
  Rng root(spec.seed);
  Rng mean_rng = root.split();

  SynthData out;
  out.global_means = synth_class_means(spec, spec.global_dim, mean_rng);
  out.object_means = synth_class_means(spec, spec.object_dim, mean_rng);
  out.face_means = synth_class_means(spec, spec.face_dim, mean_rng);
  // Class-independent distractor prototype with the same scale as a class mean.
  Vec distractor(spec.object_dim);
  for (double& x : distractor) x = mean_rng.normal();
  const double dnorm = std::sqrt(kernels::dot(distractor, distractor));
  const double dscale = std::hypot(spec.polarity_scale, spec.class_scale) / dnorm;
  for (double& x : distractor) x *= dscale;

  auto draw = [&](std::size_t per_class, Rng& rng, const std::string& tag) {
    Dataset data;
    data.reserve(per_class * C);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < per_class; ++k) {
        SampleRecord r;
        r.id = tag + "-" + spec.taxonomy.name_of(c) + "-" + std::to_string(k);
        r.label = spec.taxonomy.name_of(c);
        r.label_index = c;
        r.global = sample_around(out.global_means.row(c), spec.noise, rng);
        const std::size_t count = spec.objects_min + rng.below(spec.objects_max - spec.objects_min + 1);
        Vec flat;
        flat.reserve(count * spec.object_dim);
        for (std::size_t i = 0; i < count; ++i) {
          const bool distract = rng.uniform() < spec.distractor_prob;
          const Vec f = sample_around(distract ? std::span<const double>(distractor) : out.object_means.row(c),
                                      spec.noise, rng);
          flat.insert(flat.end(), f.begin(), f.end());
        }
        r.objects = count == 0 ? Tensor::zeros(0, 0)
                               : Tensor::matrix(count, spec.object_dim, std::move(flat));
        if (rng.uniform() < spec.face_prob) r.face.raw = sample_around(out.face_means.row(c), spec.noise, rng);
        data.push_back(std::move(r));
      }
    }
    return data;
  };

  Rng train_rng = root.split();
  Rng test_rng = root.split();
  out.train = draw(spec.train_per_class, train_rng, "train");
  out.test = draw(spec.test_per_class, test_rng, "test");
  return out;
}

}  // namespace emofuse
