#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "emofuse/config.hpp"
#include "emofuse/dataset.hpp"
#include "emofuse/error.hpp"
#include "emofuse/model_io.hpp"

using namespace emofuse;

namespace {

std::string line_with_objects(std::size_t n) {
  std::string objs = "[";
  for (std::size_t k = 0; k < n; ++k) objs += (k ? "," : "") + std::string("[") + std::to_string(k) + ",0]";
  return R"({"id":"x","label":"awe","global":[1,2],"objects":)" + objs + R"(],"face":[0.5]})";
}

}  // namespace

TEST(Jsonl, ParsesMinimalRecord) {
  std::ostringstream warn;
  const Dataset d = parse_jsonl_text(R"({"id":"a","label":"sad","global":[0,0],"objects":[],"face":null})",
                                     mikel_default(), 10, warn);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].label_index, 4u);
  EXPECT_EQ(d[0].objects.rows(), 0u);
  EXPECT_FALSE(d[0].face.present());
  EXPECT_TRUE(warn.str().empty());
}

TEST(Jsonl, TruncatesLongObjectListsWithWarning) {
  std::ostringstream warn;
  const Dataset d = parse_jsonl_text(line_with_objects(12), mikel_default(), 10, warn);
  ASSERT_EQ(d[0].objects.rows(), 10u);
  EXPECT_EQ(d[0].objects(9, 0), 9.0);
  EXPECT_NE(warn.str().find("line 1"), std::string::npos);
}

TEST(Jsonl, ErrorsNameTheLine) {
  std::ostringstream warn;
  const std::string good = R"({"id":"a","label":"sad","global":[0],"objects":[],"face":null})";
  auto message = [&](const std::string& text) {
    try {
      parse_jsonl_text(text, mikel_default(), 10, warn);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(good + "\n" + R"({"id":"b","global":[0],"objects":[],"face":null})").find("line 2"),
            std::string::npos);
  EXPECT_NE(message(R"({"id":"b","label":"joy","global":[0],"objects":[],"face":null})").find("unknown label"),
            std::string::npos);
  EXPECT_NE(message("{not json").find("line 1"), std::string::npos);
  EXPECT_NE(message(R"({"id":"b","label":"sad","global":[1e999],"objects":[],"face":null})").find("line 1"),
            std::string::npos);
  EXPECT_NE(message(R"({"id":"b","label":"sad","global":[0],"objects":[],"face":null,"x":1})").find("line 1"),
            std::string::npos);
  EXPECT_NE(message(R"({"id":"b","label":"sad","global":[0],"objects":[[1],[1,2]],"face":null})").find("line 1"),
            std::string::npos);
}

TEST(Jsonl, SkipsBlankLinesAndRoundTrips) {
  SynthSpec spec;
  spec.train_per_class = 3;
  spec.test_per_class = 1;
  const SynthData s = synth_generate(spec);
  const std::string text = to_jsonl(s.train);
  std::ostringstream warn;
  const Dataset back = parse_jsonl_text(text + "\n\n", spec.taxonomy, 100, warn);
  ASSERT_EQ(back.size(), s.train.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    EXPECT_EQ(back[k].id, s.train[k].id);
    EXPECT_EQ(back[k].global, s.train[k].global);
    EXPECT_EQ(back[k].objects, s.train[k].objects);
    EXPECT_EQ(back[k].face.raw, s.train[k].face.raw);
  }
}

TEST(Split, FractionsAndDeterminism) {
  SynthSpec spec;
  spec.train_per_class = 25;
  const Dataset all = synth_generate(spec).train;
  const Splits a = split_dataset(all, SplitFractions{}, 7);
  const Splits b = split_dataset(all, SplitFractions{}, 7);
  EXPECT_EQ(a.train.size(), 160u);
  EXPECT_EQ(a.val.size(), 10u);
  EXPECT_EQ(a.test.size(), 30u);
  for (std::size_t k = 0; k < a.test.size(); ++k) EXPECT_EQ(a.test[k].id, b.test[k].id);
}

TEST(Synth, CountsHistogramAndDeterminism) {
  const SynthData a = synth_generate(SynthSpec{});
  const SynthData b = synth_generate(SynthSpec{});
  ASSERT_EQ(a.train.size(), 2000u);
  ASSERT_EQ(a.test.size(), 400u);
  std::vector<std::size_t> hist(8, 0);
  for (const auto& r : a.train) ++hist[r.label_index];
  for (auto h : hist) EXPECT_EQ(h, 250u);
  EXPECT_EQ(to_jsonl(a.train), to_jsonl(b.train));
  EXPECT_EQ(to_jsonl(a.test), to_jsonl(b.test));
  std::size_t faces = 0;
  for (const auto& r : a.train) faces += r.face.present();
  EXPECT_GT(faces, 800u);
  EXPECT_LT(faces, 1200u);
}

TEST(Synth, SamePolarityMeansAreCloser) {
  SynthSpec spec;
  Rng rng(1);
  const Tensor means = synth_class_means(spec, 32, rng);
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t k = 0; k < 32; ++k) s += (means(a, k) - means(b, k)) * (means(a, k) - means(b, k));
    return std::sqrt(s);
  };
  double worst_same = 0.0, best_cross = 1e9;
  for (std::size_t a = 0; a < 8; ++a) {
    for (std::size_t b = a + 1; b < 8; ++b) {
      const bool same = spec.taxonomy.polarity_of(a) == spec.taxonomy.polarity_of(b);
      if (same) worst_same = std::max(worst_same, dist(a, b));
      else best_cross = std::min(best_cross, dist(a, b));
    }
  }
  EXPECT_LT(worst_same, best_cross);
}

TEST(Synth, VanishingNoiseGivesClassMeans) {
  SynthSpec spec;
  spec.noise = 1e-300;
  spec.train_per_class = 3;
  spec.distractor_prob = 0.0;
  const SynthData s = synth_generate(spec);
  for (const auto& r : s.train) {
    for (std::size_t k = 0; k < r.global.size(); ++k) EXPECT_EQ(r.global[k], s.global_means(r.label_index, k));
  }
}

TEST(Synth, SpecValidation) {
  EXPECT_THROW(synth_spec_from_json(nlohmann::json{{"noise", 0.0}}), ConfigError);
  EXPECT_THROW(synth_spec_from_json(nlohmann::json{{"colour", 1}}), ConfigError);
  EXPECT_EQ(synth_spec_from_json(nlohmann::json{{"noise", 0.7}}).noise, 0.7);
}

TEST(Config, DefaultsAndOverrides) {
  const TrainConfig r = TrainConfig::reference();
  EXPECT_EQ(r.lr, 5e-5);
  EXPECT_EQ(r.weight_decay, 5e-5);
  EXPECT_EQ(r.epochs, 50u);
  EXPECT_EQ(r.n_max, 10u);
  const TrainConfig c = config_from_json(nlohmann::json::parse(
      R"({"lambda":0.5,"dims":{"M":8},"split":{"train":0.8,"val":0.0,"test":0.2},"taxonomy":"emotion_roi"})"));
  EXPECT_EQ(c.lambda, 0.5);
  EXPECT_EQ(c.dims.M, 8u);
  EXPECT_EQ(c.dims.H, 32u);
  EXPECT_EQ(c.taxonomy, emotion_roi_default());
  EXPECT_EQ(config_from_json(config_to_json(c)).dims, c.dims);
}

TEST(Config, Rejections) {
  auto bad = [](const char* text) { return config_from_json(nlohmann::json::parse(text)); };
  EXPECT_THROW(bad(R"({"lamda":1})"), ConfigError);
  EXPECT_THROW(bad(R"({"lambda":-1})"), ConfigError);
  EXPECT_THROW(bad(R"({"dims":{"d2":16}})"), ConfigError);
  EXPECT_THROW(bad(R"({"split":{"train":0.5,"val":0.1,"test":0.1}})"), ConfigError);
  EXPECT_THROW(bad(R"({"batch_size":0})"), ConfigError);
  EXPECT_THROW(bad(R"({"taxonomy":"nope"})"), ConfigError);
  EXPECT_THROW(bad(R"({"epochs":"ten"})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(ModelFile, RoundTripBitwise) {
  ModelSpec spec;
  spec.dims = ModelDims{3, 4, 3, 4, 3, 3};
  spec.raw_global = 5;
  spec.raw_face = 2;
  spec.taxonomy = emotion_roi_default();
  spec.lambda = 0.5;
  Model m(spec);
  m.init(11);
  const auto bytes = serialize_model(m);
  const Model back = deserialize_model(bytes);
  EXPECT_EQ(serialize_model(back), bytes);
  EXPECT_EQ(back.spec().taxonomy, spec.taxonomy);
  EXPECT_EQ(back.spec().lambda, 0.5);
}

TEST(ModelFile, RejectsCorruption) {
  ModelSpec spec;
  spec.dims = ModelDims{3, 4, 3, 4, 3, 3};
  spec.raw_global = 5;
  spec.raw_face = 2;
  Model m(spec);
  auto bytes = serialize_model(m);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(deserialize_model(truncated), ModelMismatchError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(deserialize_model(magic), ModelMismatchError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(deserialize_model(trailing), ModelMismatchError);
  auto fp = bytes;
  fp[12] ^= 1;
  EXPECT_THROW(deserialize_model(fp), ModelMismatchError);
  EXPECT_THROW(load_model("/nonexistent/model.bin"), ModelMismatchError);
}
