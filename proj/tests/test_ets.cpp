#include "episim/ets.hpp"

#include <numbers>

#include "episim/rng.hpp"
#include "test_util.hpp"

using namespace episim;

namespace {

constexpr EtsSpec kANN{EtsError::Additive, EtsTrend::None, EtsSeason::None, 1};
constexpr EtsSpec kAAN{EtsError::Additive, EtsTrend::Additive, EtsSeason::None, 1};
constexpr EtsSpec kAAdN{EtsError::Additive, EtsTrend::AdditiveDamped, EtsSeason::None, 1};
constexpr EtsSpec kMNN{EtsError::Multiplicative, EtsTrend::None, EtsSeason::None, 1};

std::vector<double> noise_series(std::uint64_t seed, std::size_t n, double mean, double sd) {
  RngStream rng(seed, 0);
  std::vector<double> y(n);
  for (auto& v : y) v = rng.normal(mean, sd);
  return y;
}

}  // namespace

TEST(Ets, SpecGridHasThirtyDistinctSpecs) {
  const auto specs = all_ets_specs(12);
  EXPECT_EQ(specs.size(), 30u);
  EXPECT_TRUE(std::is_sorted(specs.begin(), specs.end()));
  EXPECT_EQ(std::adjacent_find(specs.begin(), specs.end()), specs.end());
}

TEST(Ets, SesFilterMatchesHandRecursion) {
  const std::vector<double> y = {10, 12, 9, 14, 11, 13, 15, 12, 10, 11, 16, 14};
  EtsParams p;
  p.alpha = 0.3;
  p.l0 = 10.0;
  const auto fit = ets_filter(y, kANN, p);
  double l = 10.0, sse = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    EXPECT_NEAR(fit.fitted[t], l, 1e-12) << t;
    sse += (y[t] - l) * (y[t] - l);
    l = 0.3 * y[t] + 0.7 * l;
  }
  EXPECT_NEAR(fit.state.level, l, 1e-12);
  const double n = static_cast<double>(y.size());
  const double ll = -0.5 * n * (std::log(2 * std::numbers::pi * sse / n) + 1.0);
  EXPECT_NEAR(fit.log_likelihood, ll, 1e-9);
  EXPECT_EQ(fit.k, 3);
  EXPECT_NEAR(fit.aic, 2 * 3 - 2 * ll, 1e-9);
}

TEST(Ets, MultiplicativeErrorLikelihoodHasJacobianTerm) {
  const std::vector<double> y = {10, 12, 9, 14, 11, 13, 15, 12, 10, 11};
  EtsParams p;
  p.alpha = 0.4;
  p.l0 = 11.0;
  const auto fit = ets_filter(y, kMNN, p);
  double l = 11.0, sse = 0.0, logs = 0.0;
  for (double v : y) {
    sse += ((v - l) / l) * ((v - l) / l);
    logs += std::log(l);
    l = 0.4 * v + 0.6 * l;
  }
  const double n = static_cast<double>(y.size());
  EXPECT_NEAR(fit.log_likelihood, -0.5 * n * (std::log(2 * std::numbers::pi * sse / n) + 1.0) - logs, 1e-9);
}

TEST(Ets, AlphaOneIsPersistence) {
  const auto y = noise_series(1, 40, 50, 5);
  EtsParams p;
  p.alpha = 1.0;
  p.l0 = y[0];
  const auto fit = ets_filter(y, kANN, p);
  for (double v : ets_point_forecast(fit, 6)) EXPECT_DOUBLE_EQ(v, y.back());
}

TEST(Ets, ConstantSeriesForecastsTheConstant) {
  const std::vector<double> y(60, 10.0);
  const auto fit = ets_select(y, 12);
  const auto fc = ets_forecast(fit, 8);
  for (const auto& row : fc.steps) {
    EXPECT_NEAR(row[kMedianIndex], 10.0, 1e-4);
    EXPECT_NEAR(row[kQ95] - row[kQ05], 0.0, 1e-4);
  }
}

TEST(Ets, LinearSeriesRecoversSlope) {
  std::vector<double> y(40);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = 5.0 + 2.0 * static_cast<double>(t);
  const auto fit = ets_fit(y, kAAN);
  ASSERT_TRUE(fit);
  EXPECT_NEAR(fit->slope(), 2.0, 1e-6);
  const auto pf = ets_point_forecast(*fit, 4);
  for (std::size_t h = 0; h < 4; ++h) EXPECT_NEAR(pf[h], 5.0 + 2.0 * static_cast<double>(40 + h), 1e-5);
}

TEST(Ets, DampedIncrementsDecayGeometrically) {
  const auto y = noise_series(2, 50, 100, 3);
  EtsParams p;
  p.alpha = 0.5;
  p.beta = 0.2;
  p.phi = 0.9;
  p.l0 = 100;
  p.b0 = 1.5;
  const auto fit = ets_filter(y, kAAdN, p);
  const auto pf = ets_point_forecast(fit, 9);
  const double d1 = pf[1] - pf[0];
  const double d8 = pf[8] - pf[7];
  EXPECT_NEAR(d8 / d1, std::pow(0.9, 7), 1e-9);
}

TEST(Ets, LinearVarianceIsNonDecreasing) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto y = noise_series(10 + seed, 60, 100, 8);
    for (const auto& spec : {kANN, kAAN, kAAdN, EtsSpec{EtsError::Additive, EtsTrend::None, EtsSeason::Additive, 12}}) {
      const auto fit = ets_fit(y, spec);
      ASSERT_TRUE(fit);
      const auto v = ets_linear_variance(*fit, 12);
      EXPECT_NEAR(v[0], fit->sigma2, 1e-12 * fit->sigma2);
      for (std::size_t h = 1; h < v.size(); ++h) EXPECT_GE(v[h], v[h - 1]);
    }
  }
}

TEST(Ets, SesVarianceClosedForm) {
  const auto y = noise_series(3, 50, 20, 2);
  const auto fit = ets_fit(y, kANN);
  ASSERT_TRUE(fit);
  const double a = fit->params.alpha;
  const auto v = ets_linear_variance(*fit, 5);
  for (std::size_t h = 1; h <= 5; ++h)
    EXPECT_NEAR(v[h - 1], fit->sigma2 * (1.0 + static_cast<double>(h - 1) * a * a), 1e-9 * fit->sigma2);
}

TEST(Ets, SeasonalSeriesSelectsSeasonalSpec) {
  RngStream rng(4, 0);
  std::vector<double> y(96);
  for (std::size_t t = 0; t < y.size(); ++t)
    y[t] = 100.0 + 30.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 12.0) + rng.normal(0, 2);
  const auto fit = ets_select(y, 12);
  EXPECT_TRUE(fit.spec.has_season()) << fit.spec.label();
}

TEST(Ets, SelectionEqualsBruteForceMinimum) {
  const auto y = noise_series(5, 48, 30, 4);
  std::vector<EtsFit> all;
  const auto chosen = ets_select(y, 4, {}, &all);
  ASSERT_FALSE(all.empty());
  const EtsFit* best = &all[0];
  for (const auto& f : all) {
    EXPECT_GE(f.aic, chosen.aic);
    if (f.aic < best->aic || (f.aic == best->aic && (f.k < best->k || (f.k == best->k && f.spec < best->spec))))
      best = &f;
  }
  EXPECT_EQ(best->spec, chosen.spec);
}

TEST(Ets, MultiplicativeSpecsInfeasibleWithZeros) {
  auto y = noise_series(6, 40, 30, 4);
  y[17] = 0.0;
  for (const auto& spec : all_ets_specs(4))
    if (spec.needs_positive_data()) { EXPECT_FALSE(ets_fit(y, spec)) << spec.label(); }
  const auto fit = ets_select(y, 4);
  EXPECT_EQ(fit.spec.error, EtsError::Additive);
  EXPECT_FALSE(fit.spec.needs_positive_data());
}

TEST(Ets, ShortSeriesHasNoFeasibleSpec) {
  const std::vector<double> y(9, 1.0);
  EXPECT_THROW(ets_select(y, 12), EtsSelectionError);
  const std::vector<double> z(20, 1.0);
  EXPECT_FALSE(ets_feasible(z, EtsSpec{EtsError::Additive, EtsTrend::None, EtsSeason::Additive, 12}));
  EXPECT_TRUE(ets_feasible(z, kAAN));
}

TEST(Ets, WhiteNoiseMostlySelectsNoTrend) {
  int no_trend = 0;
  constexpr int kSeries = 20;
  for (int s = 0; s < kSeries; ++s) no_trend += !ets_select(noise_series(100 + s, 60, 50, 5), 4).spec.has_trend();
  EXPECT_GT(no_trend, kSeries / 2);
}

TEST(Ets, ForecastsAreMonotoneAndDeterministic) {
  const auto y = noise_series(7, 60, 40, 6);
  EtsSpec mam{EtsError::Multiplicative, EtsTrend::AdditiveDamped, EtsSeason::None, 1};
  const auto fit = ets_fit(y, mam);
  ASSERT_TRUE(fit);
  const auto a = ets_forecast(*fit, 8);
  const auto b = ets_forecast(*fit, 8);
  EXPECT_TRUE(a.monotone());
  EXPECT_EQ(a.steps, b.steps);
}
