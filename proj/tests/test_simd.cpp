#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "vph/simd/kernels.hpp"

using namespace vph::simd;

namespace {

std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

double rel(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST(Dispatch, ScalarAlwaysAvailable) {
  EXPECT_TRUE(isa_supported(Isa::scalar));
  EXPECT_EQ(isa_name(Isa::scalar), "scalar");
  const Isa before = active_isa();
  set_active_isa(Isa::scalar);
  EXPECT_EQ(active_isa(), Isa::scalar);
  set_active_isa(before);
  EXPECT_EQ(active_isa(), before);
}

#if defined(VPH_HAVE_AVX2)

class Avx2Equivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!isa_supported(Isa::avx2)) GTEST_SKIP() << "CPU lacks AVX2/FMA";
  }
};

TEST_F(Avx2Equivalence, DotAndAxpy) {
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 31u, 257u}) {
    const auto a = uniform(n, -2.0, 2.0, n + 1);
    const auto b = uniform(n, -2.0, 2.0, n + 100);
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(a[i] * b[i]);
    EXPECT_NEAR(avx2::dot(a, b), scalar::dot(a, b), 1e-14 * std::max(1.0, abs_sum)) << n;

    auto ys = uniform(n, -1.0, 1.0, n + 200);
    auto yv = ys;
    scalar::axpy(0.37, a, ys);
    avx2::axpy(0.37, a, yv);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(yv[i], ys[i], 1e-15) << n << ' ' << i;
  }
}

TEST_F(Avx2Equivalence, ExpMatchesLibm) {
  auto x = uniform(4099, -700.0, 700.0, 9);
  x.insert(x.end(), {0.0, -0.0, 1e-300, -1e-12, 1.0, -1.0, 709.0, -708.0, -708.39, -745.0, -800.0,
                     -1e6});
  auto y = x;
  avx2::exp_inplace(y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double want = std::exp(x[i]);
    if (want < std::numeric_limits<double>::min()) {
      EXPECT_LE(y[i], std::numeric_limits<double>::min()) << x[i];
      EXPECT_GE(y[i], 0.0);
    } else {
      EXPECT_LE(rel(y[i], want), 4e-16) << x[i];
    }
  }
}

TEST_F(Avx2Equivalence, ExpDecayRowAndSum) {
  for (std::size_t n : {0u, 1u, 2u, 5u, 8u, 13u, 100u, 1001u}) {
    auto t = uniform(n, 0.0, 1000.0, n + 3);
    std::sort(t.begin(), t.end());
    const auto w = uniform(n, 0.0, 3.0, n + 4);
    std::vector<double> rs(n), rv(n);
    scalar::exp_decay_row(t, 10.0, 0.7, 0.7, rs);
    avx2::exp_decay_row(t, 10.0, 0.7, 0.7, rv);
    for (std::size_t i = 0; i < n; ++i) {
      if (rs[i] > 1e-300) {
        EXPECT_LE(rel(rv[i], rs[i]), 1e-15) << i;
      } else {
        EXPECT_LE(rv[i], 1e-300);
      }
    }
    for (double at : {0.0, 500.0, 1000.0}) {
      const double s = scalar::exp_decay_sum(t, w, at, 0.7);
      const double v = avx2::exp_decay_sum(t, w, at, 0.7);
      EXPECT_LE(rel(v, s), 1e-13) << n << " at " << at;
    }
  }
}

TEST_F(Avx2Equivalence, GaussianSumsAndMinDistance) {
  for (std::size_t n : {1u, 2u, 3u, 4u, 6u, 11u, 64u, 577u}) {
    const auto xs = uniform(n, 0.0, 1000.0, n + 7);
    const auto ys = uniform(n, 0.0, 2.0, n + 8);
    for (double x : {-5.0, 0.0, 123.4, 999.9, 1500.0}) {
      const double ms = scalar::min_sq_distance(x, xs);
      EXPECT_DOUBLE_EQ(avx2::min_sq_distance(x, xs), ms);
      for (double h : {0.5, 20.0, 300.0}) {
        const double inv = 1.0 / (2.0 * h * h);
        const GaussianSums s = scalar::gaussian_sums(x, xs, ys, inv, ms);
        const GaussianSums v = avx2::gaussian_sums(x, xs, ys, inv, ms);
        EXPECT_LE(rel(v.total, s.total), 1e-13) << n << ' ' << x << ' ' << h;
        EXPECT_LE(rel(v.weighted, s.weighted), 1e-13) << n << ' ' << x << ' ' << h;
      }
    }
  }
}

#endif
