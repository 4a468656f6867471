#include <gtest/gtest.h>

#include <cstring>

#include "emofuse/kernels.hpp"
#include "emofuse/rng.hpp"

using namespace emofuse;
namespace k = emofuse::kernels;

namespace {

std::vector<double> randv(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-3.0, 3.0);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (k::avx2_table() == nullptr || !k::cpu_supports(k::Isa::avx2)) GTEST_SKIP() << "no AVX2 variant on this host";
  }
  const k::KernelTable& s = k::scalar_table();
  const k::KernelTable& v = *k::avx2_table();
};

}  // namespace

TEST_F(KernelEquivalence, MatvecBitwise) {
  Rng rng(7);
  for (std::size_t rows = 0; rows <= 19; ++rows) {
    for (std::size_t cols : {0u, 1u, 3u, 4u, 5u, 8u, 13u, 33u}) {
      const auto W = randv(rows * cols, rng), x = randv(cols, rng);
      std::vector<double> ys(rows), yv(rows);
      s.matvec(W.data(), rows, cols, x.data(), ys.data());
      v.matvec(W.data(), rows, cols, x.data(), yv.data());
      ASSERT_TRUE(bitwise_equal(ys, yv)) << rows << "x" << cols;
    }
  }
}

TEST_F(KernelEquivalence, TransposedAndOuterBitwise) {
  Rng rng(8);
  for (std::size_t rows : {1u, 2u, 4u, 7u, 16u}) {
    for (std::size_t cols : {1u, 3u, 4u, 9u, 21u}) {
      const auto W = randv(rows * cols, rng), g = randv(rows, rng), x = randv(cols, rng);
      auto gs = randv(cols, rng), gv = gs;
      s.matvec_t_acc(W.data(), rows, cols, g.data(), gs.data());
      v.matvec_t_acc(W.data(), rows, cols, g.data(), gv.data());
      ASSERT_TRUE(bitwise_equal(gs, gv));
      auto Gs = randv(rows * cols, rng), Gv = Gs;
      s.outer_acc(Gs.data(), rows, cols, g.data(), x.data());
      v.outer_acc(Gv.data(), rows, cols, g.data(), x.data());
      ASSERT_TRUE(bitwise_equal(Gs, Gv));
    }
  }
}

TEST_F(KernelEquivalence, AxpyAndAddBitwise) {
  Rng rng(9);
  for (std::size_t n = 0; n <= 17; ++n) {
    const auto x = randv(n, rng);
    auto ys = randv(n, rng), yv = ys;
    s.axpy(-0.37, x.data(), ys.data(), n);
    v.axpy(-0.37, x.data(), yv.data(), n);
    ASSERT_TRUE(bitwise_equal(ys, yv));
    s.add(x.data(), ys.data(), n);
    v.add(x.data(), yv.data(), n);
    ASSERT_TRUE(bitwise_equal(ys, yv));
  }
}

TEST(Kernels, ScalarMatvecMatchesDefinition) {
  const std::vector<double> W{1, 2, 3, 4, 5, 6};
  const std::vector<double> x{1, -1, 2};
  std::vector<double> y(2);
  k::scalar_table().matvec(W.data(), 2, 3, x.data(), y.data());
  EXPECT_EQ(y, (std::vector<double>{5, 11}));
}

TEST(Kernels, ScopedIsaRestores) {
  const auto before = k::active().isa;
  {
    k::ScopedIsa guard(k::Isa::scalar);
    EXPECT_EQ(k::active().isa, k::Isa::scalar);
  }
  EXPECT_EQ(k::active().isa, before);
  EXPECT_EQ(k::isa_from_string("avx2"), k::Isa::avx2);
  EXPECT_FALSE(k::isa_from_string("neon").has_value());
}

TEST(Rng, DeterministicAndInRange) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

TEST(Rng, NormalMoments) {
  Rng r(3);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, SplitStreamsDiffer) {
  Rng a(5);
  Rng child = a.split();
  EXPECT_NE(a.next_u64(), child.next_u64());
}
