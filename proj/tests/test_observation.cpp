#include "episim/observation.hpp"

#include "test_util.hpp"

using namespace episim;

TEST(DelayWeights, HandValuesForDmax2) {
  const auto w = delay_weights(2.7, 2);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0], 6.0 / 11.0);
  EXPECT_EQ(w[1], 3.0 / 11.0);
  EXPECT_EQ(w[2], 2.0 / 11.0);
}

TEST(DelayWeights, NormalizedForLongSupports) {
  for (long d : {5L, 21L, 40L, 60L, 200L}) {
    double total = 0.0;
    for (double x : delay_weights(1.5, d)) total += x;
    EXPECT_NEAR(total, 1.0, 1e-12) << d;
  }
  EXPECT_THROW(delay_weights(0.0, 3), std::invalid_argument);
}

TEST(DelayWeights, ZeroMaxIsPointMass) {
  const auto w = delay_weights(1.0, 0);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0], 1.0);
}

TEST(ReportingRate, MidpointIsAverage) {
  const double r0 = 0.1, ri = 0.7, dtm = 200.0;
  EXPECT_NEAR(reporting_rate(dtm / 2, r0, ri, dtm, 6.0), (r0 + ri) / 2, 1e-12);
}

TEST(ReportingRate, MonotoneTowardsAsymptote) {
  ReportingConfig cfg{true, 0.1, 0.7, 100.0, 6.0};
  double prev = 0.0;
  for (int t = 0; t < 400; t += 10) {
    const double r = reporting_rate(t, cfg);
    EXPECT_GE(r, prev);
    prev = r;
  }
  EXPECT_NEAR(reporting_rate(1e6, cfg), 0.7, 1e-9);
  // u = -1 at t = 0: r0 + (r_inf - r0) / (1 + e^k)
  EXPECT_NEAR(reporting_rate(0, cfg), 0.1 + 0.6 / (1 + std::exp(6.0)), 1e-12);
}

TEST(Underreporting, ThinningMean) {
  RngStream r(1, 1);
  const std::vector<Count> truth(20, 10000);
  const std::vector<double> rates(20, 0.3);
  std::vector<double> means;
  for (int rep = 0; rep < 500; ++rep) {
    const auto obs = apply_underreporting(truth, rates, r);
    double s = 0.0;
    for (Count v : obs) s += static_cast<double>(v);
    means.push_back(s / 20.0);
  }
  const auto s = episim::testing::mean_se(means);
  EXPECT_NEAR(s.mean, 3000.0, 3 * s.se);
}

TEST(Delays, ConserveMassAwayFromTheEnd) {
  DelayConfig cfg{true, 10.0, 3.0, 1.0, 4.0, 100.0};
  std::vector<Count> series(300, 0);
  series[50] = 5000;
  RngStream r(2, 2);
  const auto out = apply_delays(series, cfg, r);
  Count total = 0;
  for (std::size_t t = 0; t < out.size(); ++t) {
    total += out[t];
    if (out[t] > 0) {
      EXPECT_GE(t, 50u);
      EXPECT_LE(t, 57u);  // d_max at t=50 is lround(6.5) = 7
    }
  }
  EXPECT_EQ(total, 5000);
}

TEST(Delays, ParametersInterpolate) {
  DelayConfig cfg{true, 14.0, 4.0, 1.0, 4.0, 100.0};
  EXPECT_EQ(delay_parameters(0, cfg).first, 14);
  EXPECT_EQ(delay_parameters(50, cfg).first, 9);
  EXPECT_EQ(delay_parameters(1000, cfg).first, 4);
  EXPECT_DOUBLE_EQ(delay_parameters(50, cfg).second, 2.5);
}

TEST(Weekday, FactorsCycleFromStartWeekday) {
  const WeekdayFactors f = {2.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.0};
  const std::vector<Count> s(8, 10);
  const auto out = apply_weekday(s, f, 5);  // starts on Saturday
  const std::vector<Count> expected = {5, 0, 20, 10, 10, 10, 10, 5};
  EXPECT_EQ(out, expected);
}

TEST(LabNoise, OnlyRemovesCounts) {
  LabConfig cfg;
  cfg.enabled = true;
  cfg.bad_batch_rate = 0.2;
  RngStream r(3, 3);
  const std::vector<Count> s(100, 1000);
  const auto out = apply_lab_noise(s, cfg, r);
  Count lost = 0;
  for (std::size_t t = 0; t < s.size(); ++t) {
    ASSERT_LE(out[t], s[t]);
    ASSERT_GE(out[t], 0);
    lost += s[t] - out[t];
  }
  // Expected loss fraction ~ bad_rate * (1 - mean accuracy) = 0.2 * 0.225.
  EXPECT_NEAR(static_cast<double>(lost) / 100000.0, 0.045, 0.015);
}

TEST(Observe, DisabledStagesOnlyApplyNoise) {
  ObservationConfig cfg;
  cfg.mult_noise_sd = 0.0;
  RngStream r(4, 4);
  const std::vector<Count> c = {1, 2, 3}, h = {0, 1, 0}, d = {0, 0, 1};
  const auto obs = observe(c, h, d, cfg, r);
  EXPECT_EQ(obs.cases, c);
  EXPECT_EQ(obs.hospitalizations, h);
  EXPECT_EQ(obs.deaths, d);
}

TEST(Observe, MultiplicativeNoiseKeepsZeros) {
  RngStream r(5, 5);
  const std::vector<Count> s = {0, 100, 0, 100};
  const auto out = apply_mult_noise(s, 0.1, r);
  EXPECT_EQ(out[0], 0);
  EXPECT_EQ(out[2], 0);
  EXPECT_GT(out[1], 50);
}
