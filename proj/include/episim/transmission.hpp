#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "episim/rng.hpp"

namespace episim {

/// A scenario whose population collapsed to zero; the force of infection is
/// undefined.
class DegenerateScenario : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct EpiParams {
  double sigma = 0.3;    // E -> infectious, 1/day
  double gamma = 0.2;    // symptomatic recovery, 1/day
  double gamma_a = 0.2;  // asymptomatic recovery, 1/day
  double omega = 0.0;    // waning, 1/day
  double p_a = 0.3;      // probability a new infection is asymptomatic
  double alpha = 0.5;    // relative infectiousness of A
  bool has_latent = true;
  bool has_asymptomatic = true;
  bool has_waning = true;
  bool operator==(const EpiParams&) const = default;
};

struct VectorParams {
  double biting_rate = 0.6;
  double b_h = 0.5;  // vector -> human per bite
  double b_v = 0.5;  // human -> vector per bite
  double mu_v = 0.05;
  double sigma_v = 0.2;
  double vector_ratio = 5.0;  // N_v / N_h at start
  bool operator==(const VectorParams&) const = default;
};

struct CompartmentState {
  Count S = 0, E = 0, A = 0, I = 0, R = 0;
  Count Sv = 0, Ev = 0, Iv = 0;
  double W = 0.0;

  Count humans() const noexcept { return S + E + A + I + R; }
  Count vectors() const noexcept { return Sv + Ev + Iv; }
  bool operator==(const CompartmentState&) const = default;
};

/// Per-day transmission events.
struct DayEvents {
  Count exposures = 0;
  Count new_symptomatic = 0;
  Count new_asymptomatic = 0;
  Count imports = 0;
  double force_of_infection = 0.0;
  double water_route_share = 0.0;  // expected fraction of exposures via water
};

/// Daily latent event series plus compartment occupancy at the end of each day.
struct TrueTrajectory {
  Count population = 0;
  std::vector<Count> new_exposures;
  std::vector<Count> new_symptomatic;
  std::vector<Count> new_asymptomatic;
  std::vector<Count> true_cases;
  std::vector<double> force_of_infection;
  std::vector<Count> S, E, A, I, R;
  std::vector<Count> Sv, Ev, Iv;
  std::vector<double> W;

  std::size_t days() const noexcept { return new_exposures.size(); }

  void reserve(std::size_t n) {
    for (auto* v : {&new_exposures, &new_symptomatic, &new_asymptomatic, &true_cases, &S, &E, &A,
                    &I, &R, &Sv, &Ev, &Iv})
      v->reserve(n);
    force_of_infection.reserve(n);
    W.reserve(n);
  }

  void record(const CompartmentState& s, const DayEvents& ev) {
    new_exposures.push_back(ev.exposures);
    new_symptomatic.push_back(ev.new_symptomatic);
    new_asymptomatic.push_back(ev.new_asymptomatic);
    true_cases.push_back(ev.new_symptomatic);
    force_of_infection.push_back(ev.force_of_infection);
    S.push_back(s.S);
    E.push_back(s.E);
    A.push_back(s.A);
    I.push_back(s.I);
    R.push_back(s.R);
    Sv.push_back(s.Sv);
    Ev.push_back(s.Ev);
    Iv.push_back(s.Iv);
    W.push_back(s.W);
  }
};

inline double transition_probability(double rate) { return -std::expm1(-rate); }

/// lambda = beta_eff * s * (I + alpha A) / N * m
inline double force_of_infection_h2h(const CompartmentState& state, double beta_eff,
                                     double seasonal, double multiplier, double alpha) {
  const Count n = state.humans();
  if (n <= 0) throw DegenerateScenario("force of infection: human population is zero");
  const double pressure =
      (static_cast<double>(state.I) + alpha * static_cast<double>(state.A)) / static_cast<double>(n);
  return std::max(0.0, beta_eff * seasonal * pressure * multiplier);
}

struct VectorForces {
  double human = 0.0;   // lambda_h
  double vector = 0.0;  // lambda_v
};

inline VectorForces forces_of_infection_vector(const CompartmentState& state,
                                               const VectorParams& vp, double alpha,
                                               double beta_wave, double seasonal,
                                               double intervention) {
  const Count nh = state.humans();
  const Count nv = state.vectors();
  if (nh <= 0 || nv <= 0)
    throw DegenerateScenario("vector force of infection: host or vector population is zero");
  const double common = vp.biting_rate * beta_wave * seasonal * intervention;
  VectorForces f;
  f.human = common * vp.b_h * static_cast<double>(state.Iv) / static_cast<double>(nv);
  f.vector = common * vp.b_v *
             (static_cast<double>(state.I) + alpha * static_cast<double>(state.A)) /
             static_cast<double>(nh);
  f.human = std::max(0.0, f.human);
  f.vector = std::max(0.0, f.vector);
  return f;
}

/// Human SEAIR transitions for one day with all draws taken from the
/// start-of-day state. Absent stages are bypassed: without a latent stage
/// new exposures become infectious immediately.
inline DayEvents human_transitions(CompartmentState& s, const EpiParams& epi, double lambda,
                                   RngStream& rng) {
  DayEvents ev;
  ev.force_of_infection = lambda;
  const Count exposures = rng.binomial(s.S, transition_probability(lambda));
  const Count progressed =
      epi.has_latent ? rng.binomial(s.E, transition_probability(epi.sigma)) : exposures;
  const Count new_asym = epi.has_asymptomatic ? rng.binomial(progressed, epi.p_a) : 0;
  const Count new_sym = progressed - new_asym;
  const Count rec_i = rng.binomial(s.I, transition_probability(epi.gamma));
  const Count rec_a = rng.binomial(s.A, transition_probability(epi.gamma_a));
  const Count waned = epi.has_waning ? rng.binomial(s.R, transition_probability(epi.omega)) : 0;

  s.S += waned - exposures;
  if (epi.has_latent) s.E += exposures - progressed;
  s.A += new_asym - rec_a;
  s.I += new_sym - rec_i;
  s.R += rec_i + rec_a - waned;

  ev.exposures = exposures;
  ev.new_symptomatic = new_sym;
  ev.new_asymptomatic = new_asym;
  return ev;
}

/// Vector SEI with birth-death turnover. Deaths are drawn first and the
/// survivors then face infection or progression, so no compartment can be
/// overdrawn.
inline void vector_transitions(CompartmentState& s, const VectorParams& vp, double lambda_v,
                               RngStream& rng) {
  const Count n_v = s.vectors();
  const Count dead_s = rng.binomial(s.Sv, vp.mu_v);
  const Count dead_e = rng.binomial(s.Ev, vp.mu_v);
  const Count dead_i = rng.binomial(s.Iv, vp.mu_v);
  const Count infected = rng.binomial(s.Sv - dead_s, transition_probability(lambda_v));
  const Count matured = rng.binomial(s.Ev - dead_e, transition_probability(vp.sigma_v));
  const Count births = rng.poisson(vp.mu_v * static_cast<double>(n_v));
  s.Sv += births - dead_s - infected;
  s.Ev += infected - dead_e - matured;
  s.Iv += matured - dead_i;
}

/// Route imported infections to E, or to I/A when there is no latent stage.
inline void route_imports(CompartmentState& s, const EpiParams& epi, Count imports,
                          RngStream& rng, DayEvents& ev) {
  if (imports <= 0) return;
  ev.imports = imports;
  if (epi.has_latent) {
    s.E += imports;
    return;
  }
  const Count asym = epi.has_asymptomatic ? rng.binomial(imports, epi.p_a) : 0;
  s.A += asym;
  s.I += imports - asym;
}

struct WaterParams {
  double eta = 0.005;          // shedding per symptomatic person per day
  double eta_a_relative = 0.5;  // asymptomatic shedding relative to symptomatic
  double mu_w = 0.1;           // decay, 1/day
  bool operator==(const WaterParams&) const = default;
};

/// W' = max(0, W + eta I + eta alpha_env A - mu_w W)
inline double water_update(double w, Count infectious, Count asymptomatic, const WaterParams& wp) {
  const double contamination = wp.eta * static_cast<double>(infectious) +
                               wp.eta * wp.eta_a_relative * static_cast<double>(asymptomatic);
  return std::max(0.0, w + contamination - wp.mu_w * w);
}

struct WaterForces {
  double contact = 0.0;
  double water = 0.0;
  double total() const noexcept { return contact + water; }
};

/// Contact route carries the super-spreading multiplier; both routes share
/// seasonality and have their own intervention factor.
inline WaterForces forces_of_infection_water(const CompartmentState& state, double alpha,
                                             double beta_contact, double delta_water,
                                             double seasonal, double multiplier,
                                             double f_contact, double f_water) {
  WaterForces f;
  f.contact = force_of_infection_h2h(state, beta_contact * f_contact, seasonal, multiplier, alpha);
  f.water = std::max(0.0, delta_water * seasonal * state.W * f_water);
  return f;
}

}  // namespace episim
