// episim command-line entry point: generate, evaluate, attribute, inspect.

#include <CLI11.hpp>

#include <iostream>

#include "episim/attribution.hpp"
#include "episim/harness.hpp"
#include "episim/pipeline.hpp"

namespace {

using namespace episim;

enum ExitCode : int { kOk = 0, kInvalidInput = 2, kExcluded = 3, kIoFailure = 4 };

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ModeMix parse_mode_mix(const std::string& text) {
  ModeMix mix;
  const auto parts = detail::split(text, ',');
  if (parts.size() != 3) throw InputError("--mode-mix expects three weights, e.g. 1,1,1 or h2h=1,vector=1,water=1");
  for (std::size_t i = 0; i < 3; ++i) {
    auto part = parts[i];
    std::size_t slot = i;
    if (const auto eq = part.find('='); eq != std::string_view::npos) {
      try {
        slot = static_cast<std::size_t>(parse_mode(part.substr(0, eq)));
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
      part = part.substr(eq + 1);
    }
    try {
      mix.weights[slot] = detail::parse_number<double>(part, "mode-mix");
    } catch (const std::exception&) {
      throw InputError("--mode-mix: cannot parse weight '" + std::string(part) + "'");
    }
  }
  try {
    mix.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return mix;
}

fs::path prepare_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory '" + out + "'");
  return out;
}

struct GenerateArgs {
  std::size_t size = 100;
  std::string mode_mix = "1,1,1";
  std::string out = "corpus";
  unsigned workers = 1;
  long days = 2000;
  std::string resolution = "weekly";
};

int cmd_generate(const GenerateArgs& a, std::uint64_t seed) {
  GenerationSpec spec;
  spec.size = a.size;
  spec.mix = parse_mode_mix(a.mode_mix);
  spec.master_seed = seed;
  spec.out_dir = a.out;
  spec.workers = a.workers;
  spec.days = a.days;
  spec.corpus_id = fs::path(a.out).filename().string();
  try {
    spec.resolution = parse_resolution(a.resolution);
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  GenerationStats stats;
  std::size_t last_pct = 0;
  generate_corpus(spec, &stats, [&](std::size_t done, std::size_t total) {
    const std::size_t pct = done * 10 / total;
    if (pct != last_pct || done == total) {
      last_pct = pct;
      std::cerr << "\rgenerated " << done << "/" << total << std::flush;
    }
  });
  std::cerr << '\n';
  std::cout << "manifest: " << (spec.out_dir / kManifestName).string() << '\n'
            << "seed: " << seed << '\n'
            << "scenarios: " << spec.size << '\n'
            << "simulated days: " << stats.simulated_days << '\n'
            << "elapsed: " << stats.seconds << " s\n"
            << "throughput: " << stats.days_per_second() << " simulated days/s, "
            << stats.person_days_per_second() << " person-days/s\n";
  return kOk;
}

/// Series to evaluate or attribute: a CSV file or one corpus scenario.
struct SeriesSource {
  std::string input;
  std::string library;
  std::optional<std::uint64_t> scenario;
  std::string channel = "cases";
  Count population = 0;
};

ObservedSeries load_series(const SeriesSource& src, Count* population) {
  if (!src.input.empty()) {
    CsvColumnMap map;
    map.population = src.population;
    try {
      auto s = import_csv(src.input, map);
      if (population) *population = src.population;
      return s;
    } catch (const CsvError& e) {
      throw InputError(e.what());
    }
  }
  if (src.library.empty() || !src.scenario) throw InputError("give --input CSV, or --library with --scenario");
  const auto manifest_file = manifest_path(src.library);
  const auto manifest = read_manifest(manifest_file);
  if (*src.scenario >= manifest.entries.size())
    throw InputError("scenario " + std::to_string(*src.scenario) + " not in corpus");
  const auto rec = read_scenario(manifest_file.parent_path() / manifest.entries[*src.scenario].file);
  if (population) *population = rec.config.population;
  auto s = rec.observed();
  return s.resolution == Resolution::Daily ? aggregate_weekly(s) : s;
}

struct EvaluateArgs {
  SeriesSource source;
  std::string forecaster = "persistence";
  std::vector<std::size_t> horizons = {2, 4, 6, 8};
  std::string out = "evaluation";
  std::size_t context_cap = 112;
  std::size_t min_context = 26;
  int season_length = 0;
};

int cmd_evaluate(const EvaluateArgs& a, std::uint64_t seed) {
  if (a.forecaster != "persistence" && a.forecaster != "ets")
    throw InputError("unknown forecaster '" + a.forecaster + "' (expected persistence or ets)");
  if (a.horizons.empty()) throw InputError("--horizons must list at least one horizon");
  for (auto h : a.horizons)
    if (h == 0) throw InputError("horizons must be positive");
  ObservedSeries series = load_series(a.source, nullptr);
  if (series.resolution == Resolution::Daily) series = aggregate_weekly(series);
  const Channel* ch = series.find(a.source.channel);
  if (!ch) throw InputError("series has no channel '" + a.source.channel + "'");

  const auto out_dir = prepare_out_dir(a.out);
  const auto pre = preprocess_series(ch->values, series.missing);
  if (!pre.accepted()) {
    std::ostringstream s;
    s << "seed: " << seed << "\nverdict: " << to_string(pre.verdict) << "\nobservations: " << ch->values.size() << '\n';
    write_file(out_dir / "summary.txt", s.str());
    std::cout << s.str();
    return kExcluded;
  }
  HarnessOptions opts;
  opts.context_cap = a.context_cap;
  opts.min_context = a.min_context;
  opts.horizons = a.horizons;
  const int m = a.season_length > 0 ? a.season_length
                                    : default_season_length(series.resolution != Resolution::Monthly);
  EtsOptions eopts;
  eopts.seed = seed;
  EtsForecastOptions fopts;
  fopts.seed = seed;
  const Forecaster f = a.forecaster == "ets" ? ets_forecaster(m, eopts, fopts) : persistence_forecaster();
  const auto id = a.source.input.empty() ? "scenario_" + std::to_string(*a.source.scenario)
                                         : fs::path(a.source.input).stem().string();
  const auto report = rolling_harness(pre.values, f, opts, pre.missing, id);
  write_file(out_dir / "report.csv", report_csv(report));
  std::ostringstream s;
  s << "seed: " << seed << "\nforecaster: " << a.forecaster << "\ninterpolated: " << pre.interpolated << '\n'
    << report_summary(report, a.horizons);
  write_file(out_dir / "summary.txt", s.str());
  std::cout << s.str() << "report: " << (out_dir / "report.csv").string() << '\n';
  return report.records.empty() ? kExcluded : kOk;
}

struct AttributeArgs {
  SeriesSource source;
  std::size_t k = 50;
  std::string out = "attribution";
  std::vector<std::string> parameters;
  std::string mode_filter;
  std::size_t prior_size = 5000;
};

int cmd_attribute(const AttributeArgs& a, std::uint64_t seed) {
  if (a.source.library.empty()) throw InputError("--library is required");
  if (!fs::exists(manifest_path(a.source.library)))
    throw IoError("library manifest not found at '" + manifest_path(a.source.library).string() + "'");
  if (a.k == 0) throw InputError("--k must be at least 1");
  std::optional<Mode> mode;
  if (!a.mode_filter.empty()) {
    try {
      mode = parse_mode(a.mode_filter);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  auto params = a.parameters.empty() ? all_parameter_names() : a.parameters;
  for (const auto& p : params) {
    try {
      find_parameter(p);
    } catch (const AttributionError& e) {
      throw InputError(e.what());
    }
  }
  Count population = 0;
  const auto series = load_series(a.source, &population);
  if (population <= 0) throw InputError("--population is required for CSV input");
  std::vector<double> query;
  try {
    query = embed(series, population);
  } catch (const AttributionError& e) {
    throw InputError(e.what());
  }
  const auto library = load_library(a.source.library);
  std::size_t k = a.k;
  if (k > library.size()) {
    std::cerr << "warning: k=" << k << " exceeds library size " << library.size() << "; clamped\n";
    k = library.size();
  }
  const auto neighbors = library.retrieve(query, k, mode);
  const auto result = aggregate_parameters(neighbors, library, params, prior_sample(a.prior_size, seed));

  const auto out_dir = prepare_out_dir(a.out);
  write_file(out_dir / "attribution.csv", attribution_csv(result));
  std::ostringstream s;
  s << "seed: " << seed << "\nlibrary: " << library.size() << " scenarios\nk: " << k << '\n';
  s << "nearest:";
  for (std::size_t i = 0; i < std::min<std::size_t>(5, neighbors.size()); ++i)
    s << ' ' << neighbors[i].id << " (" << neighbors[i].distance << ')';
  s << '\n';
  for (const auto& p : result.parameters) {
    s << p.name << ": ";
    if (p.retrieved) s << p.retrieved->median << " [" << p.retrieved->q5 << ", " << p.retrieved->q95 << "]";
    else s << "NA";
    if (p.prior) s << " vs prior " << p.prior->median << " [" << p.prior->q5 << ", " << p.prior->q95 << "]";
    s << '\n';
  }
  write_file(out_dir / "summary.txt", s.str());
  std::cout << s.str() << "report: " << (out_dir / "attribution.csv").string() << '\n';
  return kOk;
}

struct InspectArgs {
  std::string library;
  std::uint64_t scenario = 0;
  std::string csv;
};

int cmd_inspect(const InspectArgs& a) {
  if (a.library.empty()) throw InputError("--library is required");
  const auto manifest_file = manifest_path(a.library);
  const auto manifest = read_manifest(manifest_file);
  if (a.scenario >= manifest.entries.size())
    throw InputError("scenario " + std::to_string(a.scenario) + " not in corpus of " +
                     std::to_string(manifest.entries.size()));
  const auto& entry = manifest.entries[a.scenario];
  const auto rec = read_scenario(manifest_file.parent_path() / entry.file);
  std::cout << "scenario: " << entry.index << "\nmode: " << to_string(rec.config.mode)
            << "\npopulation: " << rec.config.population << "\nresolution: " << to_string(rec.resolution)
            << "\n\n[config]\n" << serialize_config(rec.config) << "\n[series]\n";
  for (const auto& [name, v] : rec.channels) {
    Count total = 0, peak = 0;
    std::size_t peak_at = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      total += v[i];
      if (v[i] > peak) {
        peak = v[i];
        peak_at = i;
      }
    }
    std::cout << name << ": length=" << v.size() << " total=" << total << " peak=" << peak << " at " << peak_at << '\n';
  }
  if (!a.csv.empty()) {
    write_file(a.csv, export_csv(rec));
    std::cout << "csv: " << a.csv << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"episim: synthetic outbreak corpora, forecast evaluation and attribution"};
  app.set_config("--config", "", "key = value config file; sections name subcommands, e.g. [generate]");
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "master seed")->capture_default_str();

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "sample, simulate and write a scenario corpus");
  g->add_option("--size", gen.size, "number of scenarios")->capture_default_str();
  g->add_option("--mode-mix", gen.mode_mix, "weights for h2h,vector,water")->capture_default_str();
  g->add_option("--out", gen.out, "output directory")->capture_default_str();
  g->add_option("--workers", gen.workers, "worker threads")->capture_default_str();
  g->add_option("--days", gen.days, "simulated days per scenario")->capture_default_str();
  g->add_option("--resolution", gen.resolution, "saved resolution: daily or weekly")->capture_default_str();

  const auto add_source = [](CLI::App* sub, SeriesSource& s) {
    sub->add_option("--input", s.input, "CSV with a date column and count columns");
    sub->add_option("--library", s.library, "corpus directory or manifest");
    sub->add_option("--scenario", s.scenario, "corpus scenario id to use as the series");
    sub->add_option("--channel", s.channel, "channel to use")->capture_default_str();
    sub->add_option("--population", s.population, "population for CSV input");
  };

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "rolling-origin evaluation of a baseline forecaster");
  add_source(e, ev.source);
  e->add_option("--forecaster", ev.forecaster, "persistence or ets")->capture_default_str();
  e->add_option("--horizons", ev.horizons, "forecast horizons in weeks")->delimiter(',')->capture_default_str();
  e->add_option("--out", ev.out, "output directory")->capture_default_str();
  e->add_option("--context-cap", ev.context_cap, "maximum context length")->capture_default_str();
  e->add_option("--min-context", ev.min_context, "minimum context length")->capture_default_str();
  e->add_option("--season-length", ev.season_length, "ETS season length (default 52 weekly, 12 monthly)");

  AttributeArgs at;
  auto* t = app.add_subcommand("attribute", "retrieve similar simulations and summarize their parameters");
  add_source(t, at.source);
  t->add_option("--k", at.k, "neighbours to retrieve")->capture_default_str();
  t->add_option("--out", at.out, "output directory")->capture_default_str();
  t->add_option("--params", at.parameters, "parameters to summarize (default: all)")->delimiter(',');
  t->add_option("--mode-filter", at.mode_filter, "restrict retrieval to one mode");
  t->add_option("--prior-size", at.prior_size, "prior contrast sample size")->capture_default_str();

  InspectArgs in;
  auto* i = app.add_subcommand("inspect", "print a scenario's config and series summary");
  i->add_option("--library", in.library, "corpus directory or manifest")->required();
  i->add_option("--scenario", in.scenario, "scenario id")->required();
  i->add_option("--csv", in.csv, "also export every channel to this CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kInvalidInput;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, seed);
    if (e->parsed()) return cmd_evaluate(ev, seed);
    if (t->parsed()) return cmd_attribute(at, seed);
    if (i->parsed()) return cmd_inspect(in);
  } catch (const InputError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kInvalidInput;
  } catch (const IoError& ex) {
    std::cerr << "I/O error: " << ex.what() << '\n';
    return kIoFailure;
  } catch (const FormatError& ex) {
    std::cerr << "I/O error: " << ex.what() << '\n';
    return kIoFailure;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return kOk;
}
