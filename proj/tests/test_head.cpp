#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstring>

#include "emofuse/encoders.hpp"
#include "emofuse/error.hpp"
#include "emofuse/head.hpp"
#include "emofuse/ops.hpp"
#include "emofuse/rng.hpp"
#include "support/oracle.hpp"

using namespace emofuse;

namespace {

Vec random_probs(std::size_t n, Rng& rng) {
  Vec z(n);
  for (double& v : z) v = rng.normal() * 3.0;
  return softmax(z);
}

}  // namespace

TEST(Head, FuseOrderAndWidths) {
  const FusionDims d{2, 1, 2};
  EXPECT_EQ(fuse(d, Vec{1, 2}, Vec{3}, Vec{4, 5}), (Vec{1, 2, 3, 4, 5}));
  EXPECT_THROW(fuse(d, Vec{1}, Vec{3}, Vec{4, 5}), ShapeError);
}

TEST(Head, ZeroClassifierIsUniformAndArgmaxTiesLow) {
  const ClassifierParams c(8, 5);
  const Vec p = classify(c, Vec{1, 2, 3, 4, 5});
  for (double v : p) EXPECT_DOUBLE_EQ(v, 0.125);
  EXPECT_EQ(argmax(p), 0u);
  EXPECT_EQ(argmax(Vec{0.1, 0.4, 0.4}), 1u);
}

TEST(Head, PolarityAggregationSumsToOne) {
  Rng rng(1);
  for (const Taxonomy& t : {mikel_default(), emotion_roi_default(), Taxonomy({"a", "b"}, {Polarity::positive, Polarity::negative})}) {
    for (int i = 0; i < 2000; ++i) {
      const auto pp = polarity_aggregate(t, random_probs(t.size(), rng));
      ASSERT_NEAR(pp[0] + pp[1], 1.0, 1e-12);
    }
  }
}

TEST(Head, LossMatchesOracle) {
  Rng rng(2);
  const Taxonomy t = mikel_default();
  for (int i = 0; i < 200; ++i) {
    const Vec p = random_probs(8, rng);
    const std::size_t y = rng.below(8);
    const double lambda = rng.uniform(0.0, 2.0);
    EXPECT_NEAR(hierarchical_loss(t, p, y, lambda).total, oracle::hierarchical_loss(t, p, y, lambda), 1e-12);
  }
}

TEST(Head, LambdaZeroIsCrossEntropyBitwise) {
  Rng rng(3);
  const Taxonomy t = mikel_default();
  for (int i = 0; i < 1000; ++i) {
    const Vec p = random_probs(8, rng);
    const std::size_t y = rng.below(8);
    const LossBreakdown l = hierarchical_loss(t, p, y, 0.0);
    const double ce = nll_from_probs(p, y);
    ASSERT_EQ(std::memcmp(&l.total, &ce, sizeof ce), 0);
    Vec g1(8, 0.0), g2(8, 0.0);
    hierarchical_loss_backward(t, p, y, 0.0, 1.0, g1);
    nll_backward(p, y, 1.0, g2);
    ASSERT_EQ(std::memcmp(g1.data(), g2.data(), 8 * sizeof(double)), 0);
  }
}

TEST(Head, FourScenarioLosses) {
  const Taxonomy t = mikel_default();
  const double spread = (1.0 - 0.1003) / 7.0;
  const Vec easy{0.70, 0.1003, 0.05, 0.0497, 0.025, 0.025, 0.025, 0.025};
  const Vec hard{0.05, 0.1003, 0.0297, 0.02, 0.70, 0.05, 0.025, 0.025};
  const Vec flat{spread, 0.1003, spread, spread, spread, spread, spread, spread};
  const LossBreakdown e = hierarchical_loss(t, easy, 1, 1.0);
  const LossBreakdown h = hierarchical_loss(t, hard, 1, 1.0);
  EXPECT_NEAR(e.emotion, 2.2996, 1e-4);
  EXPECT_EQ(e.emotion, h.emotion);
  EXPECT_EQ(e.emotion, hierarchical_loss(t, flat, 1, 1.0).emotion);
  EXPECT_NEAR(e.polarity, 0.1054, 1e-4);
  EXPECT_NEAR(h.polarity, 1.6094, 1e-4);
  EXPECT_EQ(h.total, h.emotion + h.polarity);
  EXPECT_THROW(hierarchical_loss(t, easy, 1, -0.5), std::invalid_argument);
}

TEST(Head, ClampedProbabilityGivesFiniteLossAndZeroGradient) {
  const Taxonomy t({"a", "b"}, {Polarity::positive, Polarity::negative});
  const Vec p{1.0, 0.0};
  const LossBreakdown l = hierarchical_loss(t, p, 1, 1.0);
  EXPECT_TRUE(std::isfinite(l.total));
  Vec g(2, 0.0);
  hierarchical_loss_backward(t, p, 1, 1.0, 1.0, g);
  EXPECT_EQ(g, Vec(2, 0.0));
}

TEST(Encoders, GlobalProjectionAndPassthrough) {
  EncoderParams p("g", EncoderMode::projection, 3, 2);
  Rng rng(1);
  p.init(rng);
  const Vec raw{0.5, -1.0, 2.0};
  const Vec out = encode_global(p, raw);
  const Vec ref = tanh_map(affine(raw, p.W.value, &p.b.value));
  EXPECT_EQ(out, ref);
  EncoderParams id("g", EncoderMode::passthrough, 3, 3);
  EXPECT_EQ(encode_global(id, raw), raw);
  EXPECT_TRUE(id.params().empty());
  EXPECT_THROW(EncoderParams("g", EncoderMode::passthrough, 3, 2), ShapeError);
  EXPECT_THROW(encoder_mode_from_string("conv"), ConfigError);
}

TEST(Encoders, AbsentFaceIsBitwiseZeroWithZeroGradients) {
  EncoderParams p("e", EncoderMode::projection, 4, 3);
  Rng rng(2);
  p.init(rng);
  EncoderTrace trace;
  const Vec v = encode_expression(p, FaceInput{}, &trace);
  ASSERT_EQ(v.size(), 3u);
  for (double x : v) {
    EXPECT_EQ(x, 0.0);
    EXPECT_FALSE(std::signbit(x));
  }
  EXPECT_FALSE(trace.active);
  encoder_backward(p, trace, Vec{1, 2, 3});
  for (Param* q : p.params()) {
    for (double g : q->grad.data()) EXPECT_EQ(g, 0.0);
  }
}

TEST(Head, HardFalseDominatesOverRandomPairs) {
  Rng rng(4);
  const Taxonomy t = mikel_default();
  for (int i = 0; i < 2000; ++i) {
    const std::size_t y = rng.below(8);
    const Vec base = random_probs(8, rng);
    Vec a = base, b = base;
    const auto& same = t.indices_of(t.polarity_of(y));
    const auto& other = t.indices_of(t.polarity_of(y) == Polarity::positive ? Polarity::negative : Polarity::positive);
    std::size_t donor = same[rng.below(same.size())];
    if (donor == y) donor = same[(std::find(same.begin(), same.end(), y) - same.begin() + 1) % same.size()];
    const double moved = b[donor] * rng.uniform(0.1, 0.9);
    b[donor] -= moved;
    b[other[rng.below(other.size())]] += moved;
    const double lambda = rng.uniform(0.01, 2.0);
    ASSERT_GT(hierarchical_loss(t, b, y, lambda).total, hierarchical_loss(t, a, y, lambda).total);
    ASSERT_EQ(hierarchical_loss(t, b, y, lambda).emotion, hierarchical_loss(t, a, y, lambda).emotion);
  }
}

TEST(Head, LossNonIncreasingInTargetProbability) {
  Rng rng(5);
  const Taxonomy t = mikel_default();
  for (int i = 0; i < 200; ++i) {
    const std::size_t y = rng.below(8);
    const Vec rest = random_probs(8, rng);
    const double rest_mass = 1.0 - rest[y];
    double prev = std::numeric_limits<double>::infinity();
    for (int s = 1; s < 50; ++s) {
      const double q = s / 50.0;
      Vec p(8);
      for (std::size_t k = 0; k < 8; ++k) p[k] = k == y ? q : rest[k] * (1.0 - q) / rest_mass;
      const double l = hierarchical_loss(t, p, y, 1.0).total;
      ASSERT_LE(l, prev + 1e-12);
      prev = l;
    }
  }
}

TEST(Head, LogitGradientMatchesFiniteDifferences) {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const Taxonomy t = i % 2 ? mikel_default() : emotion_roi_default();
    Vec z(t.size());
    for (double& v : z) v = rng.normal();
    const std::size_t y = rng.below(t.size());
    const double lambda = rng.uniform(0.0, 2.0);
    const Vec p = softmax(z);
    Vec gp(p.size(), 0.0), gz(p.size(), 0.0);
    hierarchical_loss_backward(t, p, y, lambda, 1.0, gp);
    softmax_backward(p, gp, gz);
    const Vec n = oracle::central_diff(
        [&](const Vec& x) { return oracle::hierarchical_loss(t, softmax(x), y, lambda); }, z, 1e-6);
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double diff = std::abs(gz[k] - n[k]);
      EXPECT_TRUE(diff <= 1e-7 || diff / std::max(std::abs(gz[k]), std::abs(n[k])) < 1e-4);
    }
  }
}
