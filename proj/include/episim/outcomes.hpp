#pragma once

#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "episim/rng.hpp"
#include "episim/sim_core.hpp"

namespace episim {

struct GammaDelay {
  double shape = 2.0;
  double scale = 2.0;  // days
  bool operator==(const GammaDelay&) const = default;
};

struct OutcomeConfig {
  WaveSchedule p_hosp = WaveSchedule::constant(0.0);
  WaveSchedule p_death = WaveSchedule::constant(0.0);
  GammaDelay hosp_delay;
  GammaDelay death_delay;
  long max_delay = 60;
  bool operator==(const OutcomeConfig&) const = default;
};

/// Gamma density integrated over [d, d+1) for d = 0..max_delay, renormalized.
inline std::vector<double> gamma_delay_pmf(double shape, double scale, long max_delay) {
  std::vector<double> pmf(static_cast<std::size_t>(max_delay) + 1);
  double prev = 0.0;
  double total = 0.0;
  for (long d = 0; d <= max_delay; ++d) {
    const double cdf = boost::math::gamma_p(shape, static_cast<double>(d + 1) / scale);
    pmf[static_cast<std::size_t>(d)] = cdf - prev;
    total += cdf - prev;
    prev = cdf;
  }
  for (double& p : pmf) p /= total;
  return pmf;
}

/// Multinomial split of `n` over the cells of `pmf` by sequential
/// conditional binomials. `emit(index, count)` is called for nonzero cells.
template <typename Emit>
void multinomial_scatter(Count n, std::span<const double> pmf, RngStream& rng, Emit&& emit) {
  double remaining_mass = 1.0;
  for (std::size_t i = 0; i < pmf.size() && n > 0; ++i) {
    Count k;
    if (i + 1 == pmf.size() || remaining_mass <= pmf[i]) {
      k = n;
    } else {
      k = rng.binomial(n, std::min(1.0, pmf[i] / remaining_mass));
    }
    remaining_mass -= pmf[i];
    if (k > 0) {
      emit(i, k);
      n -= k;
    }
  }
}

/// Hospitalizations that occur on `day` from symptomatic onsets on `origin`.
struct HospitalizationCell {
  long origin = 0;
  long day = 0;
  Count count = 0;
};

struct HospitalizationSeries {
  std::vector<Count> daily;
  std::vector<HospitalizationCell> cells;  // ordered by origin, then day
};

inline HospitalizationSeries generate_hospitalizations(std::span<const Count> symptomatic,
                                                       const OutcomeConfig& cfg, RngStream& rng) {
  const long horizon = static_cast<long>(symptomatic.size());
  HospitalizationSeries out;
  out.daily.assign(symptomatic.size(), 0);
  const auto pmf = gamma_delay_pmf(cfg.hosp_delay.shape, cfg.hosp_delay.scale, cfg.max_delay);
  for (long tau = 0; tau < horizon; ++tau) {
    const Count hosp = rng.binomial(symptomatic[static_cast<std::size_t>(tau)], wave_value(tau, cfg.p_hosp));
    multinomial_scatter(hosp, pmf, rng, [&](std::size_t delay, Count k) {
      const long day = tau + static_cast<long>(delay);
      if (day >= horizon) return;
      out.daily[static_cast<std::size_t>(day)] += k;
      out.cells.push_back({tau, day, k});
    });
  }
  return out;
}

/// Deaths among hospitalized cases. The death probability follows the wave
/// of the origin onset day; the delay is measured from the hospitalization day.
inline std::vector<Count> generate_deaths(const HospitalizationSeries& hosp,
                                          const OutcomeConfig& cfg, RngStream& rng) {
  const std::size_t horizon = hosp.daily.size();
  std::vector<Count> dying_by_hosp_day(horizon, 0);
  for (const auto& cell : hosp.cells) {
    dying_by_hosp_day[static_cast<std::size_t>(cell.day)] +=
        rng.binomial(cell.count, wave_value(cell.origin, cfg.p_death));
  }
  std::vector<Count> deaths(horizon, 0);
  const auto pmf = gamma_delay_pmf(cfg.death_delay.shape, cfg.death_delay.scale, cfg.max_delay);
  for (std::size_t t = 0; t < horizon; ++t) {
    multinomial_scatter(dying_by_hosp_day[t], pmf, rng, [&](std::size_t delay, Count k) {
      if (t + delay < horizon) deaths[t + delay] += k;
    });
  }
  return deaths;
}

}  // namespace episim
