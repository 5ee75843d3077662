#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "vph/diagnostics.hpp"
#include "vph/error.hpp"
#include "vph/random.hpp"
#include "vph/simulate.hpp"

using namespace vph;

namespace {

EventCatalog grid_catalog(std::size_t n, double T) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = (static_cast<double>(i) + 0.5) * T / static_cast<double>(n);
  return EventCatalog(t, T);
}

}  // namespace

TEST(SuperThin, IntensityEqualToRateKeepsEverything) {
  const auto cat = grid_catalog(50, 100.0);
  const auto r = super_thin(cat, [](double) { return 0.5; }, 0.5, 3);
  ASSERT_EQ(r.times.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(r.times[i], cat.time(i));
    EXPECT_EQ(r.origin[i], ResidualOrigin::kept);
  }
  EXPECT_EQ(r.standardized_u.size(), 50u);
}

TEST(SuperThin, DoubleIntensityKeepsAboutHalf) {
  const auto cat = grid_catalog(4000, 4000.0);
  const auto r = super_thin(cat, [](double) { return 2.0; }, 1.0, 5);
  const auto kept = std::count(r.origin.begin(), r.origin.end(), ResidualOrigin::kept);
  // Binomial(4000, 0.5): sd = 31.6.
  EXPECT_NEAR(static_cast<double>(kept), 2000.0, 4.0 * 31.6);
  EXPECT_EQ(static_cast<std::size_t>(kept), r.times.size());
}

TEST(SuperThin, EmptyCatalogGivesPoisson) {
  const EventCatalog empty({}, 1000.0);
  double total = 0.0;
  for (int s = 0; s < 200; ++s) {
    const auto r = super_thin(empty, [](double) { return 0.0; }, 0.3, derive_seed(2, s));
    for (auto o : r.origin) EXPECT_EQ(o, ResidualOrigin::superposed);
    EXPECT_TRUE(std::is_sorted(r.times.begin(), r.times.end()));
    total += static_cast<double>(r.times.size());
  }
  // Mean 300, standard error sqrt(300 / 200).
  EXPECT_NEAR(total / 200.0, 300.0, 4.0 * std::sqrt(1.5));
}

TEST(SuperThin, DeterministicAndRejectsNonPositive) {
  const auto cat = grid_catalog(100, 100.0);
  auto lam = [](double t) { return 0.5 + 0.4 * std::sin(t); };
  const auto a = super_thin(cat, lam, 0.6, 9);
  const auto b = super_thin(cat, lam, 0.6, 9);
  EXPECT_EQ(a.times, b.times);
  EXPECT_THROW(super_thin(cat, [](double) { return 0.0; }, 0.6, 9), NonPositiveIntensityError);
}

TEST(SuperThin, ResidualsAreUniformForTrueModel) {
  const auto k = TriggeringKernel::exponential(0.7);
  const auto p = simulate_variable_hawkes(0.5, k, ConstantProductivity{0.5}, 4000.0, 21);
  const IntensityModel model(p.catalog, 0.5, k, p.true_K);
  const double b = static_cast<double>(p.catalog.size()) / p.catalog.window_end();
  const auto r = super_thin(p.catalog, [&](double t) { return model(t); }, b, 1);
  const double D = ks_statistic_uniform(r.standardized_u);
  EXPECT_GT(ks_pvalue(D, r.standardized_u.size()), 0.001);
}

TEST(Standardized, HalfAtLogTwo) {
  const std::vector<double> t{std::log(2.0)};
  EXPECT_NEAR(standardized_interevent(t, 1.0)[0], 0.5, 1e-15);
  const std::vector<double> t2{1.0, 3.0};
  const auto u = standardized_interevent(t2, 0.5);
  EXPECT_NEAR(u[0], 1.0 - std::exp(-0.5), 1e-15);
  EXPECT_NEAR(u[1], 1.0 - std::exp(-1.0), 1e-15);
}

TEST(Cumsum, EndsAtOne) {
  const std::vector<double> u{0.2, 0.3, 0.5};
  const auto c = normalized_cumsum(u);
  EXPECT_NEAR(c[0], 0.2, 1e-15);
  EXPECT_NEAR(c[1], 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(c[2], 1.0);
}

TEST(Band, SingleResidualIsDegenerate) {
  const auto band = uniformity_band(1, 200, 0.95, 1);
  ASSERT_EQ(band.lower.size(), 1u);
  EXPECT_DOUBLE_EQ(band.lower[0], 1.0);
  EXPECT_DOUBLE_EQ(band.upper[0], 1.0);
}

TEST(Band, ContainsDiagonalAndIsOrdered) {
  for (auto method : {BandMethod::pointwise, BandMethod::bonferroni, BandMethod::simultaneous_rank}) {
    const std::size_t m = 80;
    const auto band = uniformity_band(m, 1000, 0.95, 4, method);
    std::vector<double> diag(m);
    for (std::size_t k = 0; k < m; ++k) diag[k] = static_cast<double>(k + 1) / m;
    EXPECT_TRUE(band.contains(diag));
    for (std::size_t k = 0; k < m; ++k) EXPECT_LE(band.lower[k], band.upper[k]);
    std::vector<double> bad = diag;
    bad[m / 2] = 0.99;
    EXPECT_FALSE(band.contains(bad));
  }
  EXPECT_THROW(uniformity_band(0, 1000, 0.95, 1), std::invalid_argument);
  EXPECT_THROW(uniformity_band(5, 10, 0.95, 1), std::invalid_argument);
}

TEST(Band, BonferroniIsWiderThanPointwise) {
  const auto p = uniformity_band(50, 2000, 0.95, 7, BandMethod::pointwise);
  const auto b = uniformity_band(50, 2000, 0.95, 7, BandMethod::bonferroni);
  for (std::size_t k = 0; k + 1 < 50; ++k) {
    EXPECT_LE(b.lower[k], p.lower[k]);
    EXPECT_GE(b.upper[k], p.upper[k]);
  }
}

TEST(Ks, StatisticAndPValue) {
  const std::vector<double> u{0.1, 0.4, 0.7};
  // Max over i of max(i/n - u_(i), u_(i) - (i-1)/n) = 0.2667 at i = 3.
  EXPECT_NEAR(ks_statistic_uniform(u), 1.0 - 0.7, 1e-15);
  EXPECT_NEAR(ks_pvalue(0.0, 10), 1.0, 1e-12);
  EXPECT_LT(ks_pvalue(0.5, 100), 1e-15);
  // Stephens-corrected critical value 1.358 / (sqrt(n) + 0.12 + 0.11 / sqrt(n)) at 5%.
  const double n = 50.0;
  const double crit = 1.358 / (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
  EXPECT_NEAR(ks_pvalue(crit, 50), 0.05, 2e-3);
}

TEST(Ks, NullRejectionRate) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int rejections = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    std::vector<double> x(40);
    for (double& v : x) v = u(rng);
    rejections += ks_pvalue(ks_statistic_uniform(x), x.size()) < 0.05 ? 1 : 0;
  }
  EXPECT_NEAR(rejections / 2000.0, 0.05, 0.015);
}

TEST(Rmse, Example) {
  const std::vector<double> a{0.0, 0.0}, b{3.0, 4.0};
  EXPECT_NEAR(rmse(a, b), 3.53553, 1e-5);
  EXPECT_THROW(rmse(a, std::vector<double>{1.0}), std::invalid_argument);
}
