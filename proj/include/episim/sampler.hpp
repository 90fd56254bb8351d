#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "episim/scenario.hpp"

namespace episim {

struct ModeMix {
  std::array<double, 3> weights = {1.0, 1.0, 1.0};  // h2h, vector, water

  void validate() const {
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("mode mix weights must be non-negative");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("mode mix weights must not all be zero");
  }
};

inline Mode sample_mode(RngStream& rng, const ModeMix& mix = {}) {
  mix.validate();
  const double total = mix.weights[0] + mix.weights[1] + mix.weights[2];
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    acc += mix.weights[i];
    if (u < acc && mix.weights[i] > 0.0) return kAllModes[i];
  }
  for (std::size_t i = 3; i-- > 0;)
    if (mix.weights[i] > 0.0) return kAllModes[i];
  return Mode::HumanToHuman;
}

struct SamplerOptions {
  long days = 2000;
  bool multiple_waves = true;
};

/// Prior ranges that differ by transmission mode.
struct ModePriors {
  double omega_lo, omega_hi;
  double has_asymptomatic;
  double has_waning;
  double seasonality_rate;
  double seasonal_baseline;
  double base_amplitude_lo, base_amplitude_hi;
  long max_wave_changes;
  double p_ss_lo, p_ss_hi;  // zero disables super-spreading
  double p_hosp_lo, p_hosp_hi;
  double p_death_lo, p_death_hi;
  double death_scale_lo, death_scale_hi;
  double overdispersion;
};

inline constexpr ModePriors priors_for(Mode m) {
  switch (m) {
    case Mode::VectorBorne:
      return {0.003, 0.02, 0.5, 1.0, 0.8, 1.2, 0.5, 1.25, 4, 0.0, 0.0,
              0.05, 0.20, 0.10, 0.40, 2.0, 5.0, 1200.0};
    case Mode::Waterborne:
      return {0.001, 0.01, 0.6, 0.9, 0.9, 1.0, 0.6, 1.5, 7, 0.0002, 0.02,
              0.02, 0.15, 0.05, 0.30, 2.0, 5.0, 100.0};
    case Mode::HumanToHuman:
    default:
      return {0.001, 0.0075, 0.5, 0.9, 0.8, 1.0, 0.1, 0.5, 4, 0.0005, 0.02,
              0.02, 0.15, 0.05, 0.30, 4.5, 8.5, 1200.0};
  }
}

namespace detail {

inline double log_uniform(RngStream& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

/// Distinct integer change days drawn uniformly from [lo, hi], sorted.
inline std::vector<long> sample_change_days(RngStream& rng, long count, long lo, long hi) {
  std::vector<long> days;
  while (static_cast<long>(days.size()) < count) {
    const long d = rng.uniform_int(lo, hi);
    if (std::find(days.begin(), days.end(), d) == days.end()) days.push_back(d);
  }
  std::sort(days.begin(), days.end());
  return days;
}

template <typename Draw>
WaveSchedule sample_segments(const std::vector<long>& changes, Draw&& draw) {
  std::vector<double> values(changes.size() + 1);
  for (double& v : values) v = draw();
  return WaveSchedule(changes, std::move(values));
}

}  // namespace detail

inline SeasonalityConfig sample_seasonality(RngStream& rng, const ModePriors& pr, long days) {
  SeasonalityConfig s;
  s.baseline = pr.seasonal_baseline;
  s.daily_noise_sd = 0.05;
  s.enabled = rng.bernoulli(pr.seasonality_rate);
  if (!s.enabled) return s;
  static constexpr std::array<double, 3> kPeriods = {365.0, 182.5, 91.25};
  const long n_h = rng.uniform_int(1, 4);
  const double base = rng.uniform(pr.base_amplitude_lo, pr.base_amplitude_hi);
  for (long j = 0; j < n_h; ++j) {
    Harmonic h;
    h.amplitude = base * rng.uniform(0.3, 1.0);
    h.phase = rng.uniform(0.0, 365.0) + rng.uniform(-60.0, 60.0);
    h.period = kPeriods[static_cast<std::size_t>(rng.uniform_int(0, 2))];
    s.harmonics.push_back(h);
  }
  const long years = (days + 364) / 365;
  for (long y = 0; y < years; ++y) s.annual_jitter.push_back(rng.uniform(-30.0, 30.0));
  return s;
}

inline InterventionConfig sample_intervention(RngStream& rng, Mode mode, Count population) {
  InterventionConfig c;
  c.enabled = rng.bernoulli(0.25);
  if (!c.enabled) return c;
  c.on_threshold = static_cast<double>(population) * rng.uniform(1e-5, 1e-3);
  c.off_threshold = c.on_threshold * rng.uniform(0.0, 1.0);
  c.reduction = rng.uniform(0.2, 0.6);
  c.water_reduction = mode == Mode::Waterborne ? rng.uniform(0.3, 0.7) : 1.0;
  c.trigger_delay = rng.uniform_int(0, 21);
  c.min_duration = rng.uniform_int(14, 35);
  if (rng.bernoulli(0.5)) c.max_duration = rng.uniform_int(60, 120);
  c.consecutive_off_days = rng.uniform_int(1, 50);
  return c;
}

inline DemographicsConfig sample_demographics(RngStream& rng) {
  DemographicsConfig d;
  d.enabled = rng.bernoulli(0.8);
  if (!d.enabled) return d;
  d.birth_rate = rng.uniform(0.00002, 0.00012);
  d.death_rate = d.birth_rate * rng.uniform(0.8, 1.3);
  d.importation_rate = std::exp(rng.uniform(std::log(0.01), std::log(0.5)));
  return d;
}

inline ObservationConfig sample_observation(RngStream& rng, const ModePriors& pr) {
  ObservationConfig o;
  o.mult_noise_sd = 0.1;
  o.overdispersion = pr.overdispersion;

  auto& rep = o.reporting;
  rep.enabled = rng.bernoulli(0.8);
  rep.r0 = rng.uniform(0.05, 0.4);
  rep.r_inf = rng.uniform(0.25, 0.85);
  if (rep.r0 > rep.r_inf) std::swap(rep.r0, rep.r_inf);
  rep.days_to_max = rng.uniform(30.0, 365.0);
  rep.steepness = rng.uniform(4.0, 8.0);

  auto& wd = o.weekday;
  wd.enabled = rng.bernoulli(0.8);
  for (std::size_t i = 0; i < 7; ++i)
    wd.factors[i] = std::clamp(rng.normal(kWeekdayFactorMeans[i], kWeekdayFactorSds[i]), 0.05, 3.0);
  wd.start_weekday = static_cast<int>(rng.uniform_int(0, 6));

  auto& lab = o.lab;
  lab.enabled = rng.bernoulli(0.8);

  auto& dl = o.delays;
  dl.enabled = rng.bernoulli(0.8);
  dl.initial_max = rng.uniform(7.0, 21.0);
  dl.final_max = rng.uniform(2.0, 7.0);
  dl.alpha0 = 1.0;
  dl.alpha_inf = 4.0;
  dl.days_to_max = rep.days_to_max;
  return o;
}

/// Draws every scenario parameter from its prior for the given mode.
inline ScenarioConfig sample_scenario(Mode mode, RngStream& rng, const SamplerOptions& opts = {}) {
  const ModePriors pr = priors_for(mode);
  ScenarioConfig c;
  c.mode = mode;
  c.days = opts.days;
  c.seed = rng.seed();
  c.stream = rng.stream_id();
  c.population = static_cast<Count>(std::llround(detail::log_uniform(rng, 5e4, 4e7)));
  c.population = std::clamp<Count>(c.population, 50000, 40000000);

  auto& epi = c.epi;
  epi.gamma = rng.uniform(0.1, 0.33);
  epi.gamma_a = rng.uniform(0.1, 0.33);
  epi.sigma = rng.uniform(0.2, 0.4);
  epi.omega = rng.uniform(pr.omega_lo, pr.omega_hi);
  epi.p_a = rng.beta(3.0, 7.0);
  epi.alpha = rng.beta(2.0, 5.0);
  epi.has_latent = rng.bernoulli(0.7);
  epi.has_asymptomatic = rng.bernoulli(pr.has_asymptomatic);
  epi.has_waning = rng.bernoulli(pr.has_waning);

  const long n_changes = opts.multiple_waves ? rng.uniform_int(0, pr.max_wave_changes) : 0;
  const long last_change = std::min<long>(1800, std::max<long>(50, opts.days - 1));
  const auto changes = detail::sample_change_days(rng, n_changes, 50, last_change);
  switch (mode) {
    case Mode::HumanToHuman:
      c.beta = detail::sample_segments(changes, [&] { return rng.uniform(0.2, 0.235); });
      break;
    case Mode::VectorBorne:
      c.beta = detail::sample_segments(changes, [&] { return rng.uniform(0.5, 0.7); });
      c.vector.biting_rate = rng.uniform(0.4, 0.8);
      c.vector.b_h = rng.uniform(0.35, 0.75);
      c.vector.b_v = rng.uniform(0.35, 0.75);
      c.vector.mu_v = rng.uniform(0.03, 0.10);
      c.vector.sigma_v = rng.uniform(0.15, 0.30);
      c.vector.vector_ratio = rng.uniform(2.0, 10.0);
      break;
    case Mode::Waterborne:
      c.beta = detail::sample_segments(changes, [&] { return rng.uniform(0.0, 0.05); });
      c.delta = detail::sample_segments(changes, [&] { return rng.uniform(0.0005, 0.01); });
      c.water.eta = rng.uniform(0.001, 0.01);
      c.water.eta_a_relative = epi.alpha;
      c.water.mu_w = rng.uniform(0.05, 0.3);
      break;
  }

  c.seasonality = sample_seasonality(rng, pr, opts.days);
  c.superspread.p_ss = pr.p_ss_hi > 0.0 ? rng.uniform(pr.p_ss_lo, pr.p_ss_hi) : 0.0;
  c.superspread.shape = 4.0;
  c.superspread.scale = 1.5;
  c.intervention = sample_intervention(rng, mode, c.population);
  c.demographics = sample_demographics(rng);

  auto& out = c.outcome;
  out.p_hosp = detail::sample_segments(changes, [&] { return rng.uniform(pr.p_hosp_lo, pr.p_hosp_hi); });
  out.p_death = detail::sample_segments(changes, [&] { return rng.uniform(pr.p_death_lo, pr.p_death_hi); });
  out.hosp_delay = {rng.uniform(2.0, 4.0), rng.uniform(1.0, 3.0)};
  out.death_delay = {rng.uniform(1.5, 2.5), rng.uniform(pr.death_scale_lo, pr.death_scale_hi)};
  out.max_delay = 60;

  c.observation = sample_observation(rng, pr);

  const double n = static_cast<double>(c.population);
  switch (mode) {
    case Mode::HumanToHuman:
      c.init.immune_fraction = 0.0;
      c.init.initial_infections = rng.negative_binomial(std::max(1.0, n * 5e-6), 0.5);
      break;
    case Mode::VectorBorne: {
      c.init.immune_fraction = rng.uniform(0.0, 0.7);
      c.init.initial_infections = rng.negative_binomial(std::max(1.0, n * 5e-6), 0.5);
      const double nv = n * c.vector.vector_ratio;
      c.init.initial_vector_exposures = rng.negative_binomial(std::max(1.0, nv * 1e-4), 0.3);
      break;
    }
    case Mode::Waterborne:
      c.init.immune_fraction = rng.beta(10.0, 3.5);
      c.init.initial_infections = rng.negative_binomial(n * 1e-6, 0.5);
      break;
  }
  return c;
}

}  // namespace episim
