#include "episim/simulate.hpp"

#include "test_util.hpp"

using namespace episim;

namespace {

ScenarioConfig basic_h2h() {
  ScenarioConfig c;
  c.mode = Mode::HumanToHuman;
  c.population = 100000;
  c.days = 300;
  c.beta = WaveSchedule::constant(0.5);
  c.epi = {0.3, 0.2, 0.25, 0.01, 0.3, 0.5, true, true, true};
  c.init.initial_infections = 50;
  return c;
}

}  // namespace

TEST(ForceOfInfection, HandValue) {
  CompartmentState s;
  s.S = 900;
  s.A = 20;
  s.I = 80;
  EXPECT_DOUBLE_EQ(force_of_infection_h2h(s, 0.3, 1.2, 1.1, 0.5), 0.3 * 1.2 * (80 + 0.5 * 20) / 1000.0 * 1.1);
}

TEST(ForceOfInfection, ZeroPopulationIsDegenerate) {
  EXPECT_THROW(force_of_infection_h2h(CompartmentState{}, 0.3, 1, 1, 0.5), DegenerateScenario);
}

TEST(ForceOfInfection, VectorHandValues) {
  CompartmentState s;
  s.S = 800;
  s.I = 150;
  s.A = 50;
  s.Sv = 4000;
  s.Iv = 1000;
  VectorParams vp{0.5, 0.4, 0.6, 0.05, 0.2, 5.0};
  const auto f = forces_of_infection_vector(s, vp, 0.5, 0.7, 1.1, 0.8);
  const double common = 0.5 * 0.7 * 1.1 * 0.8;
  EXPECT_DOUBLE_EQ(f.human, common * 0.4 * 1000.0 / 5000.0);
  EXPECT_DOUBLE_EQ(f.vector, common * 0.6 * (150 + 0.5 * 50) / 1000.0);
}

TEST(Transitions, ProbabilityFromRate) {
  EXPECT_DOUBLE_EQ(transition_probability(0.0), 0.0);
  EXPECT_NEAR(transition_probability(0.2), 1.0 - std::exp(-0.2), 1e-15);
}

TEST(Transitions, NoLatentStageBypassesE) {
  CompartmentState s;
  s.S = 10000;
  s.I = 100;
  EpiParams epi;
  epi.has_latent = false;
  RngStream r(1, 1);
  for (int t = 0; t < 50; ++t) {
    const auto ev = human_transitions(s, epi, 0.2, r);
    EXPECT_EQ(s.E, 0);
    EXPECT_EQ(ev.new_symptomatic + ev.new_asymptomatic, ev.exposures);
  }
}

TEST(Transitions, WaterReservoirUpdate) {
  WaterParams wp{0.01, 0.5, 0.1};
  EXPECT_DOUBLE_EQ(water_update(10.0, 100, 50, wp), 10.0 + 1.0 + 0.25 - 1.0);
  EXPECT_EQ(water_update(0.0, 0, 0, wp), 0.0);
}

TEST(Transitions, WaterForcesSplitByRoute) {
  CompartmentState s;
  s.S = 900;
  s.I = 100;
  s.W = 20.0;
  const auto f = forces_of_infection_water(s, 0.5, 0.2, 0.003, 1.5, 1.0, 0.5, 0.25);
  EXPECT_DOUBLE_EQ(f.contact, 0.2 * 0.5 * 1.5 * 100.0 / 1000.0);
  EXPECT_DOUBLE_EQ(f.water, 0.003 * 1.5 * 20.0 * 0.25);
}

TEST(Simulation, HumanPopulationConservedWithoutDemographics) {
  for (auto mode : {Mode::HumanToHuman, Mode::Waterborne, Mode::VectorBorne}) {
    auto c = basic_h2h();
    c.mode = mode;
    c.delta = WaveSchedule::constant(0.001);
    Simulation sim(c, RngStream(3, static_cast<std::uint64_t>(mode)));
    const Count n = sim.state().humans();
    ASSERT_EQ(n, c.population);
    for (int t = 0; t < c.days; ++t) {
      sim.step();
      ASSERT_EQ(sim.state().humans(), n) << "day " << t;
    }
  }
}

TEST(Simulation, CompartmentsStayNonNegative) {
  auto c = basic_h2h();
  c.beta = WaveSchedule::constant(3.0);
  c.demographics = {true, 0.001, 0.002, 1.0};
  const auto traj = simulate(c, RngStream(4, 4));
  for (std::size_t t = 0; t < traj.days(); ++t) {
    ASSERT_GE(traj.S[t], 0);
    ASSERT_GE(traj.E[t], 0);
    ASSERT_GE(traj.A[t], 0);
    ASSERT_GE(traj.I[t], 0);
    ASSERT_GE(traj.R[t], 0);
  }
}

TEST(Simulation, CopiesForkIdenticalFutures) {
  Simulation a(basic_h2h(), RngStream(5, 5));
  for (int t = 0; t < 40; ++t) a.step();
  Simulation b = a;
  for (int t = 0; t < 40; ++t) {
    const auto ea = a.step();
    const auto eb = b.step();
    ASSERT_EQ(ea.exposures, eb.exposures);
  }
  EXPECT_EQ(a.state(), b.state());
}

TEST(Simulation, ModeSpecificEntryPointsRejectOtherModes) {
  auto c = basic_h2h();
  EXPECT_NO_THROW(simulate_h2h(c, RngStream(1, 1)));
  EXPECT_THROW(simulate_vector(c, RngStream(1, 1)), std::invalid_argument);
  EXPECT_THROW(simulate_water(c, RngStream(1, 1)), std::invalid_argument);
}

TEST(Simulation, VectorPopulationStartsAtRatio) {
  auto c = basic_h2h();
  c.mode = Mode::VectorBorne;
  c.vector.vector_ratio = 3.5;
  c.init.initial_vector_exposures = 40;
  Simulation sim(c, RngStream(6, 6));
  EXPECT_EQ(sim.state().vectors(), 350000);
  EXPECT_EQ(sim.state().Ev, 40);
}

TEST(Simulation, InterventionReducesEpidemicSize) {
  auto base = basic_h2h();
  base.epi.has_waning = false;
  auto ctl = base;
  ctl.intervention.enabled = true;
  ctl.intervention.on_threshold = 20;
  ctl.intervention.off_threshold = 1;
  ctl.intervention.reduction = 0.2;
  ctl.intervention.min_duration = 1000;
  Count a = 0, b = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    for (Count v : simulate(base, RngStream(7, s)).true_cases) a += v;
    for (Count v : simulate(ctl, RngStream(7, s)).true_cases) b += v;
  }
  EXPECT_LT(b, a / 2);
}
