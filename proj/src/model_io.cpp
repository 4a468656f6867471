#include "emofuse/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

#include "emofuse/error.hpp"

namespace emofuse {
namespace {

constexpr char kMagic[8] = {'E', 'M', 'O', 'F', 'U', 'S', 'E', '\x01'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  void need(std::size_t n) {
    if (pos_ + n > in_.size()) throw ModelMismatchError("model file truncated");
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * k);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * k);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  const ModelSpec& s = model.spec();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kModelFormatVersion);
  w.u64(s.taxonomy.fingerprint());
  w.str(serialize_taxonomy(s.taxonomy));
  for (std::size_t v : {s.taxonomy.size(), s.raw_global, s.raw_face, s.dims.d1, s.dims.d2, s.dims.d3, s.dims.H,
                        s.dims.M, s.dims.F}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  w.u32(s.semantic == SemanticKind::fc ? 1 : 0);
  w.u32(s.encoder == EncoderMode::passthrough ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(s.n_max));
  w.u32(static_cast<std::uint32_t>(s.t_steps));
  w.f64(s.lambda);
  const auto params = model.params();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    w.str(p->name);
    w.u8(p->value.is_vector() ? 1 : 2);
    w.u32(static_cast<std::uint32_t>(p->value.rows()));
    w.u32(static_cast<std::uint32_t>(p->value.cols()));
    for (double v : p->value.data()) w.f64(v);
  }
  return w.take();
}

Model deserialize_model(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(sizeof kMagic);
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw ModelMismatchError("not a model file (bad magic)");
  for (std::size_t k = 0; k < sizeof kMagic; ++k) r.u8();
  if (const auto v = r.u32(); v != kModelFormatVersion) {
    throw ModelMismatchError("unsupported model format version " + std::to_string(v));
  }
  const std::uint64_t fingerprint = r.u64();
  ModelSpec spec;
  try {
    spec.taxonomy = load_taxonomy(r.str());
  } catch (const ParseError& e) {
    throw ModelMismatchError(std::string("model taxonomy: ") + e.what());
  }
  if (spec.taxonomy.fingerprint() != fingerprint) throw ModelMismatchError("model taxonomy fingerprint mismatch");
  if (r.u32() != spec.taxonomy.size()) throw ModelMismatchError("model class count disagrees with its taxonomy");
  spec.raw_global = r.u32();
  spec.raw_face = r.u32();
  spec.dims.d1 = r.u32();
  spec.dims.d2 = r.u32();
  spec.dims.d3 = r.u32();
  spec.dims.H = r.u32();
  spec.dims.M = r.u32();
  spec.dims.F = r.u32();
  spec.semantic = r.u32() == 1 ? SemanticKind::fc : SemanticKind::lstm;
  spec.encoder = r.u32() == 1 ? EncoderMode::passthrough : EncoderMode::projection;
  spec.n_max = r.u32();
  spec.t_steps = r.u32();
  spec.lambda = r.f64();

  std::optional<Model> model;
  try {
    model.emplace(spec);
  } catch (const ShapeError& e) {
    throw ModelMismatchError(std::string("model header: ") + e.what());
  }
  auto params = model->params();
  if (r.u32() != params.size()) throw ModelMismatchError("model parameter count mismatch");
  for (Param* p : params) {
    const std::string name = r.str();
    const bool vec = r.u8() == 1;
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (name != p->name || vec != p->value.is_vector() || rows != p->value.rows() || cols != p->value.cols()) {
      throw ModelMismatchError("model parameter '" + name + "' does not match the expected layout of '" + p->name +
                               "' " + p->value.shape_string());
    }
    for (double& v : p->value.data()) v = r.f64();
    if (!p->value.all_finite()) throw ModelMismatchError("model parameter '" + name + "' has non-finite values");
  }
  if (!r.done()) throw ModelMismatchError("trailing bytes after model parameters");
  model->zero_grad();
  return std::move(*model);
}

void save_model(const std::string& path, const Model& model) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelMismatchError("cannot open model file '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace emofuse
