#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "episim/dataset_io.hpp"
#include "episim/sampler.hpp"
#include "episim/simulate.hpp"

namespace episim {

/// Sub-stream tags. Every random draw for scenario i comes from
/// RngStream(master, i) or a child of it, so output is independent of which
/// worker ran the scenario.
enum StreamTag : std::uint64_t {
  kTagMode = 1,
  kTagConfig = 2,
  kTagSimulation = 3,
  kTagOutcomes = 4,
  kTagObservation = 5,
};

inline ScenarioConfig sample_scenario_config(std::uint64_t master_seed, std::uint64_t index,
                                             const ModeMix& mix, const SamplerOptions& opts = {}) {
  const RngStream base(master_seed, index);
  RngStream mode_rng = base.derive(kTagMode);
  RngStream cfg_rng = base.derive(kTagConfig);
  ScenarioConfig cfg = sample_scenario(sample_mode(mode_rng, mix), cfg_rng, opts);
  cfg.seed = master_seed;
  cfg.stream = index;
  return cfg;
}

struct ScenarioOutput {
  TrueTrajectory truth;
  std::vector<Count> true_hospitalizations;
  std::vector<Count> true_deaths;
  ObservedChannels observed;
};

/// Simulation, outcomes and observation for a config, seeded from its
/// (seed, stream) pair.
inline ScenarioOutput run_scenario(const ScenarioConfig& cfg) {
  const RngStream base(cfg.seed, cfg.stream);
  ScenarioOutput out;
  out.truth = simulate(cfg, base.derive(kTagSimulation));
  RngStream out_rng = base.derive(kTagOutcomes);
  const auto hosp = generate_hospitalizations(out.truth.true_cases, cfg.outcome, out_rng);
  out.true_deaths = generate_deaths(hosp, cfg.outcome, out_rng);
  out.true_hospitalizations = hosp.daily;
  RngStream obs_rng = base.derive(kTagObservation);
  out.observed = observe(out.truth.true_cases, out.true_hospitalizations, out.true_deaths,
                         cfg.observation, obs_rng);
  return out;
}

inline ScenarioRecord make_record(const ScenarioConfig& cfg, const ScenarioOutput& out,
                                  Resolution resolution) {
  ScenarioRecord rec;
  rec.config = cfg;
  rec.resolution = resolution;
  const auto add = [&](std::string name, const std::vector<Count>& daily) {
    if (resolution == Resolution::Weekly)
      rec.channels.emplace_back(std::move(name), aggregate_weekly<Count>(daily));
    else
      rec.channels.emplace_back(std::move(name), daily);
  };
  add("true_exposures", out.truth.new_exposures);
  add("true_cases", out.truth.true_cases);
  add("true_hospitalizations", out.true_hospitalizations);
  add("true_deaths", out.true_deaths);
  add("observed_cases", out.observed.cases);
  add("observed_hospitalizations", out.observed.hospitalizations);
  add("observed_deaths", out.observed.deaths);
  return rec;
}

struct GenerationSpec {
  std::size_t size = 1;
  ModeMix mix;
  std::uint64_t master_seed = 0;
  fs::path out_dir;
  unsigned workers = 1;
  Resolution resolution = Resolution::Weekly;
  long days = 2000;
  std::string corpus_id = "corpus";

  void validate() const {
    mix.validate();
    if (size < 1) throw std::invalid_argument("corpus size must be at least 1");
    if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
    if (days < 1) throw std::invalid_argument("days must be at least 1");
    if (resolution == Resolution::Monthly) throw std::invalid_argument("monthly corpora are not supported");
  }
};

struct GenerationStats {
  double seconds = 0.0;
  long simulated_days = 0;
  double person_days = 0.0;
  double days_per_second() const { return seconds > 0.0 ? simulated_days / seconds : 0.0; }
  double person_days_per_second() const { return seconds > 0.0 ? person_days / seconds : 0.0; }
};

/// Runs `job(i)` for i in [0, n) on `workers` threads. The first exception
/// stops further scheduling and is rethrown.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto run = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (error) std::rethrow_exception(error);
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Writes one record per scenario plus the manifest into spec.out_dir.
inline DatasetManifest generate_corpus(const GenerationSpec& spec, GenerationStats* stats = nullptr,
                                       const ProgressFn& progress = {}) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec || !fs::is_directory(spec.out_dir))
    throw IoError("cannot create output directory '" + spec.out_dir.string() + "'");

  const auto t0 = std::chrono::steady_clock::now();
  DatasetManifest manifest;
  manifest.corpus_id = spec.corpus_id;
  manifest.master_seed = spec.master_seed;
  manifest.days = spec.days;
  manifest.resolution = spec.resolution;
  manifest.entries.resize(spec.size);
  std::vector<double> populations(spec.size, 0.0);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  SamplerOptions opts;
  opts.days = spec.days;

  parallel_for(spec.size, spec.workers, [&](std::size_t i) {
    const auto cfg = sample_scenario_config(spec.master_seed, i, spec.mix, opts);
    const auto rec = make_record(cfg, run_scenario(cfg), spec.resolution);
    const auto name = scenario_file_name(i);
    write_scenario(rec, spec.out_dir / name);
    manifest.entries[i] = summarize(rec, i, name);
    populations[i] = static_cast<double>(cfg.population);
    const auto d = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(d, spec.size);
    }
  });
  write_manifest(manifest, spec.out_dir);

  if (stats) {
    stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stats->simulated_days = static_cast<long>(spec.size) * spec.days;
    stats->person_days = 0.0;
    for (double p : populations) stats->person_days += p * static_cast<double>(spec.days);
  }
  return manifest;
}

}  // namespace episim
