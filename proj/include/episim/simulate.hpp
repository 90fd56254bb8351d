#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "episim/scenario.hpp"

namespace episim {

/// Forcing terms resolved for one day before any transitions are drawn.
struct DayInputs {
  double beta = 0.0;      // wave value (contact route)
  double delta = 0.0;     // wave value (water route)
  double seasonal = 1.0;
  double multiplier = 1.0;  // super-spreading, contact route only
  double intervention = 1.0;
  double water_intervention = 1.0;
};

inline DayEvents step_h2h(CompartmentState& state, const EpiParams& epi, const DayInputs& in,
                          RngStream& rng) {
  const double lambda = force_of_infection_h2h(state, in.beta * in.intervention, in.seasonal,
                                               in.multiplier, epi.alpha);
  return human_transitions(state, epi, lambda, rng);
}

inline DayEvents step_vector(CompartmentState& state, const EpiParams& epi, const VectorParams& vp,
                             const DayInputs& in, RngStream& rng) {
  const auto forces =
      forces_of_infection_vector(state, vp, epi.alpha, in.beta, in.seasonal, in.intervention);
  DayEvents ev = human_transitions(state, epi, forces.human, rng);
  vector_transitions(state, vp, forces.vector, rng);
  return ev;
}

/// Combined-rate exposures; W is refreshed from the post-transition I and A.
inline DayEvents step_water(CompartmentState& state, const EpiParams& epi, const WaterParams& wp,
                            const DayInputs& in, RngStream& rng) {
  const auto forces = forces_of_infection_water(state, epi.alpha, in.beta, in.delta, in.seasonal,
                                                in.multiplier, in.intervention,
                                                in.water_intervention);
  DayEvents ev = human_transitions(state, epi, forces.total(), rng);
  ev.water_route_share = forces.total() > 0.0 ? forces.water / forces.total() : 0.0;
  state.W = water_update(state.W, state.I, state.A, wp);
  return ev;
}

/// Resumable daily simulator for one scenario. Copying it forks the
/// trajectory; replace the stream with `reseed` to draw an independent future.
class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, RngStream rng) : cfg_(cfg), rng_(rng) {
    cfg_.beta.validate();
    initialize();
  }

  const ScenarioConfig& config() const noexcept { return cfg_; }
  const CompartmentState& state() const noexcept { return state_; }
  CompartmentState& mutable_state() noexcept { return state_; }
  long day() const noexcept { return day_; }
  bool intervention_active() const noexcept { return control_.active; }
  void reseed(RngStream rng) { rng_ = rng; }

  DayInputs day_inputs() {
    DayInputs in;
    in.beta = wave_value(day_, cfg_.beta);
    in.delta = cfg_.mode == Mode::Waterborne ? wave_value(day_, cfg_.delta) : 0.0;
    in.seasonal = seasonal_factor(day_, cfg_.seasonality, rng_);
    if (control_.active) {
      in.intervention = cfg_.intervention.reduction;
      in.water_intervention = cfg_.intervention.water_reduction;
    }
    if (cfg_.mode != Mode::VectorBorne)
      in.multiplier = superspread_multiplier(state_.I + state_.A, cfg_.superspread, rng_);
    return in;
  }

  DayEvents step() {
    const DayInputs in = day_inputs();
    DayEvents ev;
    switch (cfg_.mode) {
      case Mode::HumanToHuman: ev = step_h2h(state_, cfg_.epi, in, rng_); break;
      case Mode::VectorBorne: ev = step_vector(state_, cfg_.epi, cfg_.vector, in, rng_); break;
      case Mode::Waterborne: ev = step_water(state_, cfg_.epi, cfg_.water, in, rng_); break;
    }
    if (cfg_.demographics.enabled) {
      std::array<Count, 5> humans{state_.S, state_.E, state_.A, state_.I, state_.R};
      const Count imports = demographic_step(humans, cfg_.demographics, rng_);
      state_.S = humans[0];
      state_.E = humans[1];
      state_.A = humans[2];
      state_.I = humans[3];
      state_.R = humans[4];
      route_imports(state_, cfg_.epi, imports, rng_, ev);
    }
    control_ = intervention_step(control_, static_cast<double>(ev.new_symptomatic), cfg_.intervention);
    ++day_;
    return ev;
  }

  TrueTrajectory run() {
    TrueTrajectory traj;
    traj.population = state_.humans();
    traj.reserve(static_cast<std::size_t>(cfg_.days));
    while (day_ < cfg_.days) {
      const DayEvents ev = step();
      traj.record(state_, ev);
    }
    return traj;
  }

 private:
  void initialize() {
    const Count n = cfg_.population;
    if (n <= 0) throw DegenerateScenario("scenario population must be positive");
    const Count immune = std::min<Count>(
        n, static_cast<Count>(std::llround(cfg_.init.immune_fraction * static_cast<double>(n))));
    const Count infected = std::min<Count>(n - immune, cfg_.init.initial_infections);
    state_.R = immune;
    if (cfg_.epi.has_latent) {
      state_.E = infected;
    } else {
      state_.A = cfg_.epi.has_asymptomatic ? rng_.binomial(infected, cfg_.epi.p_a) : 0;
      state_.I = infected - state_.A;
    }
    state_.S = n - immune - infected;
    if (cfg_.mode == Mode::VectorBorne) {
      const Count nv = std::max<Count>(
          1, static_cast<Count>(std::llround(cfg_.vector.vector_ratio * static_cast<double>(n))));
      state_.Ev = std::min(nv, cfg_.init.initial_vector_exposures);
      state_.Sv = nv - state_.Ev;
    }
    state_.W = 0.0;
  }

  ScenarioConfig cfg_;
  RngStream rng_;
  CompartmentState state_;
  InterventionState control_;
  long day_ = 0;
};

inline TrueTrajectory simulate(const ScenarioConfig& cfg, RngStream rng) {
  return Simulation(cfg, rng).run();
}

inline TrueTrajectory simulate_h2h(const ScenarioConfig& cfg, RngStream rng) {
  if (cfg.mode != Mode::HumanToHuman) throw std::invalid_argument("simulate_h2h: wrong mode");
  return simulate(cfg, rng);
}

inline TrueTrajectory simulate_vector(const ScenarioConfig& cfg, RngStream rng) {
  if (cfg.mode != Mode::VectorBorne) throw std::invalid_argument("simulate_vector: wrong mode");
  return simulate(cfg, rng);
}

inline TrueTrajectory simulate_water(const ScenarioConfig& cfg, RngStream rng) {
  if (cfg.mode != Mode::Waterborne) throw std::invalid_argument("simulate_water: wrong mode");
  return simulate(cfg, rng);
}

}  // namespace episim
