#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "episim/rng.hpp"

namespace episim {

inline constexpr double kDaysPerYear = 365.0;

struct Harmonic {
  double amplitude = 0.0;
  double period = 365.0;  // days
  double phase = 0.0;     // days
  bool operator==(const Harmonic&) const = default;
};

/// Multi-harmonic seasonal forcing
///   s(t) = baseline + sum_j A_j cos(2 pi (t - phase_j + jitter_y) / P_j) + eps_t
/// with one peak-jitter value per simulated 365-day year.
struct SeasonalityConfig {
  bool enabled = false;
  double baseline = 1.0;
  std::vector<Harmonic> harmonics;
  std::vector<double> annual_jitter;  // days, indexed by floor(t / 365)
  double daily_noise_sd = 0.05;
  bool operator==(const SeasonalityConfig&) const = default;
};

/// Deterministic part of s(t); no noise, no clamp.
inline double seasonal_mean(long t, const SeasonalityConfig& cfg) {
  if (!cfg.enabled) return cfg.baseline;
  const auto year = static_cast<std::size_t>(t / static_cast<long>(kDaysPerYear));
  const double jitter = year < cfg.annual_jitter.size() ? cfg.annual_jitter[year] : 0.0;
  double s = cfg.baseline;
  for (const auto& h : cfg.harmonics) {
    s += h.amplitude *
         std::cos(2.0 * std::numbers::pi * (static_cast<double>(t) - h.phase + jitter) / h.period);
  }
  return s;
}

/// Seasonal multiplier for day t, clamped below at zero. A disabled config
/// returns the baseline without consuming randomness.
inline double seasonal_factor(long t, const SeasonalityConfig& cfg, RngStream& rng) {
  if (!cfg.enabled) return cfg.baseline;
  double s = seasonal_mean(t, cfg);
  if (cfg.daily_noise_sd > 0.0) s += rng.normal(0.0, cfg.daily_noise_sd);
  return std::max(0.0, s);
}

/// Piecewise-constant rate: segment i covers [change_days[i-1], change_days[i]).
struct WaveSchedule {
  std::vector<long> change_days;
  std::vector<double> segment_values;

  WaveSchedule() = default;
  WaveSchedule(std::vector<long> changes, std::vector<double> values)
      : change_days(std::move(changes)), segment_values(std::move(values)) {
    validate();
  }
  static WaveSchedule constant(double value) { return WaveSchedule({}, {value}); }

  void validate() const {
    if (segment_values.size() != change_days.size() + 1)
      throw std::invalid_argument("WaveSchedule: need one more segment value than change days");
    for (std::size_t i = 1; i < change_days.size(); ++i)
      if (change_days[i] <= change_days[i - 1])
        throw std::invalid_argument("WaveSchedule: change days must be strictly increasing");
  }

  std::size_t segment_index(long t) const {
    return static_cast<std::size_t>(
        std::upper_bound(change_days.begin(), change_days.end(), t) - change_days.begin());
  }

  bool operator==(const WaveSchedule&) const = default;
};

inline double wave_value(long t, const WaveSchedule& schedule) {
  return schedule.segment_values[schedule.segment_index(t)];
}

/// Time-weighted mean of a schedule over [0, horizon).
inline double wave_mean(const WaveSchedule& schedule, long horizon) {
  double total = 0.0;
  long start = 0;
  for (std::size_t i = 0; i < schedule.segment_values.size(); ++i) {
    long end = i < schedule.change_days.size() ? std::min(schedule.change_days[i], horizon) : horizon;
    if (end > start) total += schedule.segment_values[i] * static_cast<double>(end - start);
    start = std::max(start, end);
  }
  return horizon > 0 ? total / static_cast<double>(horizon) : schedule.segment_values.front();
}

struct SuperSpreadConfig {
  double p_ss = 0.0;
  double shape = 4.0;
  double scale = 1.5;
  bool operator==(const SuperSpreadConfig&) const = default;
};

/// m = (1 - n_ss/n) + (n_ss/n) M, n_ss ~ Bin(n, p_ss), M ~ Gamma(shape, scale).
inline double superspread_multiplier(Count n_infectious, const SuperSpreadConfig& cfg,
                                     RngStream& rng) {
  if (n_infectious <= 0 || !(cfg.p_ss > 0.0)) return 1.0;
  const Count n_ss = rng.binomial(n_infectious, cfg.p_ss);
  if (n_ss == 0) return 1.0;
  const double frac = static_cast<double>(n_ss) / static_cast<double>(n_infectious);
  const double boost = rng.gamma(cfg.shape, cfg.scale);
  return (1.0 - frac) + frac * boost;
}

struct InterventionConfig {
  bool enabled = false;
  double on_threshold = 0.0;   // cases/day
  double off_threshold = 0.0;  // cases/day
  double reduction = 1.0;      // transmission multiplier while active
  double water_reduction = 1.0;  // second route (waterborne only)
  long trigger_delay = 0;
  long min_duration = 0;
  std::optional<long> max_duration;
  long consecutive_off_days = 1;
  bool operator==(const InterventionConfig&) const = default;
};

/// Threshold controller memory. Feed one day's case count per call; the
/// returned flag says whether the policy is active on that day.
struct InterventionState {
  bool active = false;
  long days_over = 0;     // consecutive days above on-threshold while inactive
  long active_days = 0;   // index of the current day within the activation (0-based)
  long days_below = 0;    // consecutive days below off-threshold while active
  bool operator==(const InterventionState&) const = default;
};

inline InterventionState intervention_step(InterventionState state, double daily_cases,
                                           const InterventionConfig& cfg) {
  if (!cfg.enabled) return InterventionState{};
  if (!state.active) {
    state.days_over = daily_cases > cfg.on_threshold ? state.days_over + 1 : 0;
    if (state.days_over > cfg.trigger_delay) {
      state.active = true;
      state.active_days = 0;
      state.days_below = 0;
      state.days_over = 0;
    }
    return state;
  }
  ++state.active_days;
  state.days_below = daily_cases < cfg.off_threshold ? state.days_below + 1 : 0;
  const bool expired = cfg.max_duration && state.active_days >= *cfg.max_duration;
  const bool quiet =
      state.active_days >= cfg.min_duration && state.days_below >= cfg.consecutive_off_days;
  if (expired || quiet) state = InterventionState{};
  return state;
}

struct DemographicsConfig {
  bool enabled = false;
  double birth_rate = 0.0;      // per capita per day
  double death_rate = 0.0;      // per capita per day
  double importation_rate = 0.0;  // expected imports per day
  bool operator==(const DemographicsConfig&) const = default;
};

/// Births into compartment 0, per-compartment binomial deaths, Poisson
/// imports. Returns the import count; the caller routes imports.
inline Count demographic_step(std::span<Count> compartments, const DemographicsConfig& cfg,
                              RngStream& rng) {
  if (!cfg.enabled) return 0;
  Count total = 0;
  for (Count c : compartments) total += c;
  const Count births = rng.poisson(cfg.birth_rate * static_cast<double>(total));
  const double p_death = std::min(cfg.death_rate, 1.0);
  for (Count& c : compartments) c -= rng.binomial(c, p_death);
  if (!compartments.empty()) compartments[0] += births;
  return rng.poisson(cfg.importation_rate);
}

}  // namespace episim
