#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "episim/outcomes.hpp"
#include "episim/rng.hpp"

namespace episim {

struct ReportingConfig {
  bool enabled = false;
  double r0 = 1.0;
  double r_inf = 1.0;
  double days_to_max = 180.0;
  double steepness = 6.0;
  bool operator==(const ReportingConfig&) const = default;
};

struct DelayConfig {
  bool enabled = false;
  double initial_max = 14.0;  // days
  double final_max = 4.0;     // days
  double alpha0 = 1.0;
  double alpha_inf = 4.0;
  double days_to_max = 180.0;  // ramp length, shared with the reporting curve
  bool operator==(const DelayConfig&) const = default;
};

/// Monday = 0 ... Sunday = 6.
using WeekdayFactors = std::array<double, 7>;

inline constexpr WeekdayFactors kWeekdayFactorMeans = {1.2, 1.0, 1.0, 1.0, 0.9, 0.6, 0.4};
inline constexpr WeekdayFactors kWeekdayFactorSds = {0.15, 0.1, 0.1, 0.1, 0.12, 0.2, 0.2};

struct WeekdayConfig {
  bool enabled = false;
  WeekdayFactors factors = {1, 1, 1, 1, 1, 1, 1};
  int start_weekday = 0;
  bool operator==(const WeekdayConfig&) const = default;
};

struct LabConfig {
  bool enabled = false;
  double mean_batch_size = 100.0;
  double bad_batch_rate = 0.005;
  double accuracy_lo = 0.7;
  double accuracy_hi = 0.85;
  bool operator==(const LabConfig&) const = default;
};

struct ObservationConfig {
  double mult_noise_sd = 0.1;
  ReportingConfig reporting;
  DelayConfig delays;
  WeekdayConfig weekday;
  LabConfig lab;
  double overdispersion = 1200.0;  // stored, not applied
  bool operator==(const ObservationConfig&) const = default;
};

inline Count round_count(double x) {
  return x <= 0.0 ? 0 : static_cast<Count>(std::llround(x));
}

inline std::vector<Count> apply_mult_noise(std::span<const Count> series, double sd, RngStream& rng) {
  std::vector<Count> out(series.begin(), series.end());
  if (!(sd > 0.0)) return out;
  for (Count& c : out) {
    if (c == 0) continue;
    c = round_count(static_cast<double>(c) * rng.lognormal(0.0, sd));
  }
  return out;
}

/// Logistic ramp evaluated on normalized time u = (t - t_mid) / (days_to_max / 2),
/// with t_mid = days_to_max / 2, so the steepness spans the ramp window.
inline double reporting_rate(double t, double r0, double r_inf, double days_to_max, double steepness) {
  const double half = days_to_max / 2.0;
  const double u = (t - half) / half;
  return r0 + (r_inf - r0) / (1.0 + std::exp(-steepness * u));
}

inline double reporting_rate(double t, const ReportingConfig& cfg) {
  return reporting_rate(t, cfg.r0, cfg.r_inf, cfg.days_to_max, cfg.steepness);
}

inline std::vector<Count> apply_underreporting(std::span<const Count> series,
                                               std::span<const double> rates, RngStream& rng) {
  std::vector<Count> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) out[t] = rng.binomial(series[t], rates[t]);
  return out;
}

inline std::vector<double> reporting_curve(std::size_t days, const ReportingConfig& cfg) {
  std::vector<double> r(days);
  for (std::size_t t = 0; t < days; ++t) r[t] = reporting_rate(static_cast<double>(t), cfg);
  return r;
}

/// P(delay = d) proportional to alpha / (d + 1) on 0..d_max. Alpha cancels.
/// While lcm(1..d_max+1) is small enough, the weights are ratios of exact
/// integers (numerators lcm / (d+1)), so each is correctly rounded.
inline std::vector<double> delay_weights(double alpha, long d_max) {
  if (!(alpha > 0.0)) throw std::invalid_argument("delay alpha must be positive");
  std::vector<double> w(static_cast<std::size_t>(std::max(0L, d_max)) + 1);
  constexpr std::uint64_t kExact = std::uint64_t{1} << 50;
  std::uint64_t l = 1;
  for (std::uint64_t k = 2; k <= w.size() && l < kExact; ++k) l = std::lcm(l, k);
  if (l < kExact) {
    std::uint64_t total = 0;
    for (std::size_t d = 0; d < w.size(); ++d) total += l / (d + 1);
    for (std::size_t d = 0; d < w.size(); ++d)
      w[d] = static_cast<double>(l / (d + 1)) / static_cast<double>(total);
    return w;
  }
  double total = 0.0;
  for (std::size_t d = 0; d < w.size(); ++d) {
    w[d] = 1.0 / static_cast<double>(d + 1);
    total += w[d];
  }
  for (double& x : w) x /= total;
  return w;
}

/// Maximum delay and alpha for day t, interpolated from initial to final
/// values over the ramp. The support bound rounds to the nearest day.
inline std::pair<long, double> delay_parameters(double t, const DelayConfig& cfg) {
  const double frac = cfg.days_to_max > 0.0 ? std::clamp(t / cfg.days_to_max, 0.0, 1.0) : 1.0;
  const double d_max = cfg.initial_max + (cfg.final_max - cfg.initial_max) * frac;
  const double alpha = cfg.alpha0 + (cfg.alpha_inf - cfg.alpha0) * frac;
  return {std::lround(d_max), alpha};
}

/// Scatters each day's count over the following days. Mass landing past the
/// end of the series is dropped.
inline std::vector<Count> apply_delays(std::span<const Count> series, const DelayConfig& cfg,
                                       RngStream& rng) {
  if (!cfg.enabled) return {series.begin(), series.end()};
  std::vector<Count> out(series.size(), 0);
  long cached_dmax = -1;
  std::vector<double> pmf;
  double cached_alpha = -1.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (series[t] == 0) continue;
    const auto [d_max, alpha] = delay_parameters(static_cast<double>(t), cfg);
    if (d_max != cached_dmax || alpha != cached_alpha) {
      pmf = delay_weights(alpha, d_max);
      cached_dmax = d_max;
      cached_alpha = alpha;
    }
    multinomial_scatter(series[t], pmf, rng, [&](std::size_t d, Count k) {
      if (t + d < out.size()) out[t + d] += k;
    });
  }
  return out;
}

inline std::vector<Count> apply_weekday(std::span<const Count> series, const WeekdayFactors& factors,
                                        int start_weekday) {
  std::vector<Count> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const auto wd = static_cast<std::size_t>((static_cast<std::size_t>(start_weekday) + t) % 7);
    out[t] = round_count(static_cast<double>(series[t]) * factors[wd]);
  }
  return out;
}

/// Splits each day's specimens into batches of Poisson(mean) size; a bad
/// batch keeps a Uniform[lo, hi] fraction of its counts. Runs of good
/// batches are skipped geometrically: their combined size is a single
/// Poisson draw.
inline std::vector<Count> apply_lab_noise(std::span<const Count> series, const LabConfig& cfg,
                                          RngStream& rng) {
  std::vector<Count> out(series.begin(), series.end());
  if (!cfg.enabled || !(cfg.bad_batch_rate > 0.0)) return out;
  for (Count& day : out) {
    Count remaining = day;
    while (remaining > 0) {
      const Count good_batches = rng.geometric(cfg.bad_batch_rate);
      if (good_batches > 0) {
        const double good_mass_mean = cfg.mean_batch_size * static_cast<double>(good_batches);
        if (good_mass_mean > 1e12) break;
        const Count good_mass = rng.poisson(good_mass_mean);
        if (good_mass >= remaining) break;
        remaining -= good_mass;
      }
      const Count batch = std::min(remaining, rng.poisson(cfg.mean_batch_size));
      const double accuracy = rng.uniform(cfg.accuracy_lo, cfg.accuracy_hi);
      day -= batch - rng.binomial(batch, accuracy);
      remaining -= batch;
    }
  }
  return out;
}

struct ObservedChannels {
  std::vector<Count> cases;
  std::vector<Count> hospitalizations;
  std::vector<Count> deaths;
};

/// Case series: noise, underreporting, lab, delays, weekday. Hospitalization
/// and death series: noise and delays.
inline ObservedChannels observe(std::span<const Count> true_cases, std::span<const Count> hosp,
                                std::span<const Count> deaths, const ObservationConfig& cfg,
                                RngStream& rng) {
  ObservedChannels obs;
  auto cases = apply_mult_noise(true_cases, cfg.mult_noise_sd, rng);
  if (cfg.reporting.enabled) {
    const auto rates = reporting_curve(cases.size(), cfg.reporting);
    cases = apply_underreporting(cases, rates, rng);
  }
  if (cfg.lab.enabled) cases = apply_lab_noise(cases, cfg.lab, rng);
  cases = apply_delays(cases, cfg.delays, rng);
  if (cfg.weekday.enabled) cases = apply_weekday(cases, cfg.weekday.factors, cfg.weekday.start_weekday);
  obs.cases = std::move(cases);

  obs.hospitalizations = apply_delays(apply_mult_noise(hosp, cfg.mult_noise_sd, rng), cfg.delays, rng);
  obs.deaths = apply_delays(apply_mult_noise(deaths, cfg.mult_noise_sd, rng), cfg.delays, rng);
  return obs;
}

}  // namespace episim
