#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "episim/dataset_io.hpp"
#include "episim/metrics.hpp"
#include "episim/pipeline.hpp"

namespace episim {

class AttributionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<std::size_t, 7> kAcfLags = {1, 2, 4, 8, 13, 26, 52};
inline constexpr std::size_t kMinEmbedWeeks = 8;

/// Period bands in weeks, [lo, hi).
struct SpectralBand {
  const char* name;
  double lo, hi;
};
inline constexpr std::array<SpectralBand, 5> kSpectralBands = {{
    {"spec_long", 78.0, 1e18},
    {"spec_annual", 39.0, 78.0},
    {"spec_semiannual", 20.0, 39.0},
    {"spec_quarterly", 8.0, 20.0},
    {"spec_short", 0.0, 8.0},
}};

inline const std::vector<std::string>& embedding_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"lvl_mean", "lvl_sd",  "lvl_max",  "lvl_q10",  "lvl_q25",
                                  "lvl_q50",  "lvl_q75", "lvl_q90",  "zero_frac", "gr_mean",
                                  "gr_sd",    "gr_q10",  "gr_q50",   "gr_q90",   "gr_absmean",
                                  "peak_count_per_year", "peak_spacing", "peak_second_ratio",
                                  "peak_position"};
    for (auto lag : kAcfLags) n.push_back("acf_" + std::to_string(lag));
    for (const auto& b : kSpectralBands) n.push_back(b.name);
    n.insert(n.end(), {"has_hosp", "hosp_ratio", "hosp_lvl_mean", "has_deaths", "death_ratio",
                       "death_lvl_mean"});
    return n;
  }();
  return names;
}

namespace detail {

/// Missing points are filled from the nearest present neighbours.
inline std::vector<double> fill_missing(const std::vector<double>& v, const std::vector<bool>& missing) {
  std::vector<double> out = v;
  const auto miss = [&](std::size_t i) { return i < missing.size() && missing[i]; };
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!miss(i)) {
      if (prev && *prev + 1 < i)
        for (std::size_t j = *prev + 1; j < i; ++j)
          out[j] = out[*prev] + (out[i] - out[*prev]) * static_cast<double>(j - *prev) / static_cast<double>(i - *prev);
      else if (!prev)
        for (std::size_t j = 0; j < i; ++j) out[j] = out[i];
      prev = i;
    }
  }
  if (!prev) std::fill(out.begin(), out.end(), 0.0);
  else
    for (std::size_t j = *prev + 1; j < out.size(); ++j) out[j] = out[*prev];
  return out;
}

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sd_of(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.size() < 2 ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

inline double autocorrelation(std::span<const double> v, std::size_t lag) {
  if (lag >= v.size()) return 0.0;
  const double m = mean_of(v);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) den += (v[i] - m) * (v[i] - m);
  if (den <= 0.0) return 0.0;
  for (std::size_t i = lag; i < v.size(); ++i) num += (v[i] - m) * (v[i - lag] - m);
  return num / den;
}

/// Share of periodogram energy in each period band.
inline std::array<double, kSpectralBands.size()> band_energy(std::span<const double> v) {
  std::array<double, kSpectralBands.size()> out{};
  const std::size_t n = v.size();
  const double m = mean_of(v);
  double total = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      acc += (v[t] - m) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n));
    const double power = std::norm(acc);
    const double period = static_cast<double>(n) / static_cast<double>(k);
    for (std::size_t b = 0; b < kSpectralBands.size(); ++b)
      if (period >= kSpectralBands[b].lo && period < kSpectralBands[b].hi) out[b] += power;
    total += power;
  }
  if (total > 0.0)
    for (double& e : out) e /= total;
  return out;
}

struct PeakStats {
  double count_per_year = 0.0, spacing = 0.0, second_ratio = 0.0, position = 0.0;
};

/// Peaks of the 5-week moving average of log counts that rise at least 0.5
/// log units above the lowest point since the previous peak.
inline PeakStats peak_stats(std::span<const double> lvl) {
  const std::size_t n = lvl.size();
  std::vector<double> sm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i >= 2 ? i - 2 : 0, b = std::min(n, i + 3);
    sm[i] = mean_of(lvl.subspan(a, b - a));
  }
  std::vector<std::size_t> peaks;
  double trough = sm.empty() ? 0.0 : sm[0];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    trough = std::min(trough, sm[i]);
    if (sm[i] > sm[i - 1] && sm[i] >= sm[i + 1] && sm[i] - trough >= 0.5) {
      peaks.push_back(i);
      trough = sm[i];
    }
  }
  PeakStats p;
  p.count_per_year = static_cast<double>(peaks.size()) * 52.0 / static_cast<double>(n);
  if (peaks.size() >= 2)
    p.spacing = static_cast<double>(peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1) / 52.0;
  std::vector<double> heights;
  for (auto i : peaks) heights.push_back(sm[i]);
  std::sort(heights.rbegin(), heights.rend());
  if (heights.size() >= 2 && heights[0] > 0.0) p.second_ratio = heights[1] / heights[0];
  const auto top = std::max_element(sm.begin(), sm.end()) - sm.begin();
  p.position = n ? static_cast<double>(top) / static_cast<double>(n) : 0.0;
  return p;
}

}  // namespace detail

/// Fixed-length summary of a weekly (or daily, aggregated here) series on a
/// per-100k scale. Unstandardized; LibraryIndex standardizes.
inline std::vector<double> embed(const ObservedSeries& input, Count population) {
  if (population <= 0) throw AttributionError("embedding needs a positive population");
  const ObservedSeries series = input.resolution == Resolution::Daily ? aggregate_weekly(input) : input;
  const Channel* cases = series.find("cases");
  if (!cases) throw AttributionError("embedding needs a 'cases' channel");
  if (cases->values.size() < kMinEmbedWeeks)
    throw AttributionError("series shorter than " + std::to_string(kMinEmbedWeeks) + " weeks");
  const double per = 1e5 / static_cast<double>(population);
  const auto level = [&](const Channel& c) {
    auto v = detail::fill_missing(c.values, series.missing);
    for (double& x : v) x = std::log1p(std::max(0.0, x) * per);
    return v;
  };
  const auto lvl = level(*cases);
  std::vector<double> f;
  f.reserve(embedding_feature_names().size());

  auto sorted = lvl;
  std::sort(sorted.begin(), sorted.end());
  f.push_back(detail::mean_of(lvl));
  f.push_back(detail::sd_of(lvl));
  f.push_back(sorted.back());
  for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) f.push_back(sorted_quantile(sorted, q));
  f.push_back(static_cast<double>(std::count(lvl.begin(), lvl.end(), 0.0)) / static_cast<double>(lvl.size()));

  std::vector<double> growth(lvl.size() - 1);
  for (std::size_t i = 0; i + 1 < lvl.size(); ++i) growth[i] = lvl[i + 1] - lvl[i];
  auto gs = growth;
  std::sort(gs.begin(), gs.end());
  double abs_mean = 0.0;
  for (double g : growth) abs_mean += std::abs(g);
  f.push_back(detail::mean_of(growth));
  f.push_back(detail::sd_of(growth));
  for (double q : {0.1, 0.5, 0.9}) f.push_back(sorted_quantile(gs, q));
  f.push_back(abs_mean / static_cast<double>(growth.size()));

  const auto peaks = detail::peak_stats(lvl);
  f.insert(f.end(), {peaks.count_per_year, peaks.spacing, peaks.second_ratio, peaks.position});
  for (auto lag : kAcfLags) f.push_back(detail::autocorrelation(lvl, lag));
  for (double e : detail::band_energy(lvl)) f.push_back(e);

  double case_total = 0.0;
  for (double v : detail::fill_missing(cases->values, series.missing)) case_total += std::max(0.0, v);
  for (const char* name : {"hospitalizations", "deaths"}) {
    const Channel* c = series.find(name);
    if (!c || c->values.size() != cases->values.size()) {
      f.insert(f.end(), {0.0, 0.0, 0.0});
      continue;
    }
    double total = 0.0;
    for (double v : detail::fill_missing(c->values, series.missing)) total += std::max(0.0, v);
    f.push_back(1.0);
    f.push_back(std::log((total + 1.0) / (case_total + 1.0)));
    f.push_back(detail::mean_of(level(*c)));
  }
  for (double& x : f)
    if (!std::isfinite(x)) x = 0.0;
  return f;
}

struct LibraryEntry {
  std::uint64_t id = 0;
  ScenarioConfig config;
  std::vector<double> raw;  // unstandardized embedding
};

struct Neighbor {
  std::uint64_t id = 0;
  double distance = 0.0;
  bool operator==(const Neighbor&) const = default;
};

/// Immutable, standardized feature matrix over a simulation library.
class LibraryIndex {
 public:
  LibraryIndex() = default;

  explicit LibraryIndex(std::vector<LibraryEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw AttributionError("empty library");
    const std::size_t d = entries_.front().raw.size();
    mean_.assign(d, 0.0);
    sd_.assign(d, 0.0);
    for (const auto& e : entries_)
      for (std::size_t j = 0; j < d; ++j) mean_[j] += e.raw[j];
    for (double& m : mean_) m /= static_cast<double>(entries_.size());
    for (const auto& e : entries_)
      for (std::size_t j = 0; j < d; ++j) sd_[j] += (e.raw[j] - mean_[j]) * (e.raw[j] - mean_[j]);
    for (double& s : sd_) {
      s = std::sqrt(s / static_cast<double>(entries_.size()));
      if (!(s > 1e-12)) s = 1.0;
    }
    features_.reserve(entries_.size() * d);
    for (const auto& e : entries_) {
      const auto z = standardize(e.raw);
      features_.insert(features_.end(), z.begin(), z.end());
    }
    dim_ = d;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (!position_.emplace(entries_[i].id, i).second)
        throw AttributionError("duplicate scenario id " + std::to_string(entries_[i].id));
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<LibraryEntry>& entries() const { return entries_; }
  const LibraryEntry& entry(std::size_t i) const { return entries_.at(i); }

  const LibraryEntry& by_id(std::uint64_t id) const {
    const auto it = position_.find(id);
    if (it == position_.end()) throw AttributionError("scenario id " + std::to_string(id) + " not in library");
    return entries_[it->second];
  }

  std::vector<double> standardize(std::span<const double> raw) const {
    if (raw.size() != mean_.size()) throw AttributionError("embedding dimension mismatch");
    std::vector<double> z(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) z[j] = (raw[j] - mean_[j]) / sd_[j];
    return z;
  }

  std::span<const double> standardized(std::size_t i) const {
    return std::span<const double>(features_).subspan(i * dim_, dim_);
  }

  /// k nearest by Euclidean distance in standardized space, ascending,
  /// ties by id. An optional mode filter restricts candidates.
  std::vector<Neighbor> retrieve(std::span<const double> raw_query, std::size_t k,
                                 std::optional<Mode> mode = std::nullopt) const {
    if (entries_.empty()) throw AttributionError("empty library");
    const auto q = standardize(raw_query);
    std::vector<Neighbor> all;
    all.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (mode && entries_[i].config.mode != *mode) continue;
      const auto row = standardized(i);
      double d2 = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) d2 += (row[j] - q[j]) * (row[j] - q[j]);
      all.push_back({entries_[i].id, d2});
    }
    k = std::min(k, all.size());
    const auto less = [](const Neighbor& a, const Neighbor& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), less);
    all.resize(k);
    for (auto& n : all) n.distance = std::sqrt(n.distance);
    return all;
  }

 private:
  std::vector<LibraryEntry> entries_;
  std::vector<double> mean_, sd_, features_;
  std::unordered_map<std::uint64_t, std::size_t> position_;
  std::size_t dim_ = 0;
};

inline LibraryEntry library_entry(const ScenarioRecord& rec, std::uint64_t id) {
  return {id, rec.config, embed(rec.observed(), rec.config.population)};
}

/// Loads every manifest scenario except those in `exclude`.
inline LibraryIndex load_library(const fs::path& manifest_or_dir, const std::vector<std::uint64_t>& exclude = {}) {
  const auto path = manifest_path(manifest_or_dir);
  const auto manifest = read_manifest(path);
  std::vector<LibraryEntry> entries;
  entries.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    if (std::find(exclude.begin(), exclude.end(), e.index) != exclude.end()) continue;
    entries.push_back(library_entry(read_scenario(path.parent_path() / e.file), e.index));
  }
  return LibraryIndex(std::move(entries));
}

// ---------------------------------------------------------------------------
// Parameters

struct ParameterDef {
  std::string name;
  bool boolean = false;
  std::function<std::optional<double>(const ScenarioConfig&)> get;
};

inline const std::vector<ParameterDef>& parameter_registry() {
  using C = ScenarioConfig;
  using O = std::optional<double>;
  static const std::vector<ParameterDef> defs = {
      {"mode_h2h", true, [](const C& c) -> O { return c.mode == Mode::HumanToHuman; }},
      {"mode_vector", true, [](const C& c) -> O { return c.mode == Mode::VectorBorne; }},
      {"mode_water", true, [](const C& c) -> O { return c.mode == Mode::Waterborne; }},
      {"log10_population", false, [](const C& c) -> O { return std::log10(static_cast<double>(c.population)); }},
      {"sigma", false, [](const C& c) -> O { return c.epi.sigma; }},
      {"gamma", false, [](const C& c) -> O { return c.epi.gamma; }},
      {"gamma_a", false, [](const C& c) -> O { return c.epi.gamma_a; }},
      {"omega", false, [](const C& c) -> O { return c.epi.omega; }},
      {"p_a", false, [](const C& c) -> O { return c.epi.p_a; }},
      {"alpha", false, [](const C& c) -> O { return c.epi.alpha; }},
      {"has_latent", true, [](const C& c) -> O { return c.epi.has_latent; }},
      {"has_asymptomatic", true, [](const C& c) -> O { return c.epi.has_asymptomatic; }},
      {"has_waning", true, [](const C& c) -> O { return c.epi.has_waning; }},
      {"beta_mean", false, [](const C& c) -> O { return wave_mean(c.beta, c.days); }},
      {"wave_changes", false, [](const C& c) -> O { return static_cast<double>(c.beta.change_days.size()); }},
      {"seasonality", true, [](const C& c) -> O { return c.seasonality.enabled; }},
      {"seasonal_amplitude", false,
       [](const C& c) -> O {
         double a = 0.0;
         if (c.seasonality.enabled)
           for (const auto& h : c.seasonality.harmonics) a += h.amplitude;
         return a;
       }},
      {"p_superspread", false,
       [](const C& c) -> O { return c.mode == Mode::VectorBorne ? O{} : O{c.superspread.p_ss}; }},
      {"intervention", true, [](const C& c) -> O { return c.intervention.enabled; }},
      {"demographics", true, [](const C& c) -> O { return c.demographics.enabled; }},
      {"importation_rate", false,
       [](const C& c) -> O { return c.demographics.enabled ? O{c.demographics.importation_rate} : O{}; }},
      {"immune_fraction", false, [](const C& c) -> O { return c.init.immune_fraction; }},
      {"p_hosp_mean", false, [](const C& c) -> O { return wave_mean(c.outcome.p_hosp, c.days); }},
      {"p_death_mean", false, [](const C& c) -> O { return wave_mean(c.outcome.p_death, c.days); }},
      {"reporting_r0", false,
       [](const C& c) -> O { return c.observation.reporting.enabled ? O{c.observation.reporting.r0} : O{}; }},
      {"reporting_r_inf", false,
       [](const C& c) -> O { return c.observation.reporting.enabled ? O{c.observation.reporting.r_inf} : O{}; }},
      {"biting_rate", false,
       [](const C& c) -> O { return c.mode == Mode::VectorBorne ? O{c.vector.biting_rate} : O{}; }},
      {"mu_v", false, [](const C& c) -> O { return c.mode == Mode::VectorBorne ? O{c.vector.mu_v} : O{}; }},
      {"sigma_v", false, [](const C& c) -> O { return c.mode == Mode::VectorBorne ? O{c.vector.sigma_v} : O{}; }},
      {"vector_ratio", false,
       [](const C& c) -> O { return c.mode == Mode::VectorBorne ? O{c.vector.vector_ratio} : O{}; }},
      {"delta_mean", false,
       [](const C& c) -> O { return c.mode == Mode::Waterborne ? O{wave_mean(c.delta, c.days)} : O{}; }},
      {"eta", false, [](const C& c) -> O { return c.mode == Mode::Waterborne ? O{c.water.eta} : O{}; }},
      {"mu_w", false, [](const C& c) -> O { return c.mode == Mode::Waterborne ? O{c.water.mu_w} : O{}; }},
  };
  return defs;
}

inline const ParameterDef& find_parameter(std::string_view name) {
  for (const auto& d : parameter_registry())
    if (d.name == name) return d;
  throw AttributionError("unknown parameter '" + std::string(name) + "'");
}

inline std::vector<std::string> all_parameter_names() {
  std::vector<std::string> names;
  for (const auto& d : parameter_registry()) names.push_back(d.name);
  return names;
}

struct Summary3 {
  double median = 0.0, q5 = 0.0, q95 = 0.0;
};

inline std::optional<Summary3> summarize_values(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  return Summary3{sorted_quantile(v, 0.5), sorted_quantile(v, 0.05), sorted_quantile(v, 0.95)};
}

struct ParameterSummary {
  std::string name;
  std::optional<Summary3> retrieved;  // nullopt: not applicable to the retrieved scenarios
  std::optional<Summary3> prior;
};

struct AttributionResult {
  std::vector<Neighbor> neighbors;
  std::vector<ParameterSummary> parameters;
};

/// Configs drawn from the sampler prior (no simulation), for contrast.
inline std::vector<ScenarioConfig> prior_sample(std::size_t n, std::uint64_t seed, const ModeMix& mix = {},
                                                long days = 2000) {
  std::vector<ScenarioConfig> out;
  out.reserve(n);
  SamplerOptions opts;
  opts.days = days;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_scenario_config(seed, i, mix, opts));
  return out;
}

inline AttributionResult aggregate_parameters(const std::vector<Neighbor>& neighbors, const LibraryIndex& library,
                                              const std::vector<std::string>& parameters,
                                              const std::vector<ScenarioConfig>& prior) {
  AttributionResult res;
  res.neighbors = neighbors;
  for (const auto& name : parameters) {
    const auto& def = find_parameter(name);
    std::vector<double> got, pri;
    for (const auto& n : neighbors)
      if (auto v = def.get(library.by_id(n.id).config)) got.push_back(*v);
    for (const auto& c : prior)
      if (auto v = def.get(c)) pri.push_back(*v);
    res.parameters.push_back({name, summarize_values(std::move(got)), summarize_values(std::move(pri))});
  }
  return res;
}

inline std::string attribution_csv(const AttributionResult& r) {
  std::ostringstream out;
  out << std::setprecision(8);
  out << "parameter,retrieved_median,retrieved_q5,retrieved_q95,prior_median,prior_q5,prior_q95\n";
  const auto cell = [&](const std::optional<Summary3>& s) {
    if (s) out << ',' << s->median << ',' << s->q5 << ',' << s->q95;
    else out << ",NA,NA,NA";
  };
  for (const auto& p : r.parameters) {
    out << p.name;
    cell(p.retrieved);
    cell(p.prior);
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Validation

/// Parameters scored by validate_attribution by default: defined for every
/// mode, so every held-out scenario is compared on the same coordinates.
inline std::vector<std::string> default_validation_parameters() {
  return {"mode_h2h", "mode_vector", "mode_water", "gamma", "omega", "has_waning", "seasonality",
          "seasonal_amplitude", "immune_fraction", "p_hosp_mean", "p_death_mean", "wave_changes"};
}

/// Standardized parameter-space distance: numeric coordinates are divided
/// by their prior standard deviation; booleans compare a 0/1 majority vote.
class ParameterMetric {
 public:
  ParameterMetric(const std::vector<std::string>& names, const std::vector<ScenarioConfig>& prior) {
    for (const auto& n : names) {
      const auto& def = find_parameter(n);
      std::vector<double> v;
      for (const auto& c : prior)
        if (auto x = def.get(c)) v.push_back(*x);
      double sd = detail::sd_of(v);
      if (!(sd > 0.0)) sd = 1.0;
      defs_.push_back(&def);
      sd_.push_back(sd);
    }
  }

  double distance(std::span<const ScenarioConfig* const> members, const ScenarioConfig& truth) const {
    double d2 = 0.0;
    for (std::size_t p = 0; p < defs_.size(); ++p) {
      const auto t = defs_[p]->get(truth);
      if (!t) continue;
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto* m : members)
        if (auto v = defs_[p]->get(*m)) {
          sum += *v;
          ++n;
        }
      if (n == 0) {
        d2 += 1.0;
        continue;
      }
      const double centroid = sum / static_cast<double>(n);
      if (defs_[p]->boolean) {
        const double vote = centroid > 0.5 ? 1.0 : 0.0;
        d2 += vote != *t ? 1.0 : 0.0;
      } else {
        const double z = (centroid - *t) / sd_[p];
        d2 += z * z;
      }
    }
    return std::sqrt(d2);
  }

 private:
  std::vector<const ParameterDef*> defs_;
  std::vector<double> sd_;
};

struct HeldOut {
  ScenarioConfig config;
  std::vector<double> raw;  // embedding of its observed series
};

struct ValidationCase {
  double retrieved_distance = 0.0;
  double random_distance = 0.0;
};

struct ValidationReport {
  std::vector<ValidationCase> cases;
  std::size_t wins = 0, losses = 0, ties = 0;
  double win_fraction = 0.0;  // wins / (wins + losses)
  double sign_test_p = 1.0;   // one-sided, H1: retrieval wins more often
};

enum class RetrievalKind { Nearest, Random };

struct ValidationOptions {
  std::size_t k = 50;
  std::vector<std::string> parameters = default_validation_parameters();
  std::size_t prior_size = 5000;
  std::uint64_t seed = 0;
  RetrievalKind retrieval = RetrievalKind::Nearest;
};

/// One-sided sign-test p-value P(X >= wins) for X ~ Bin(wins + losses, 1/2).
inline double sign_test_p_value(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  if (wins == 0) return 1.0;
  const boost::math::binomial_distribution<double> b(static_cast<double>(n), 0.5);
  return boost::math::cdf(boost::math::complement(b, static_cast<double>(wins) - 1.0));
}

/// For each held-out scenario, compares the centroid of its k retrieved
/// neighbours with the centroid of k library members drawn at random.
/// With RetrievalKind::Random the "retrieved" set is itself random.
inline ValidationReport validate_attribution(const std::vector<HeldOut>& held_out, const LibraryIndex& library,
                                             const ValidationOptions& opts = {}) {
  const auto prior = prior_sample(opts.prior_size, opts.seed ^ 0x9E3779B97F4A7C15ULL);
  const ParameterMetric metric(opts.parameters, prior);
  RngStream rng(opts.seed, 0xA77);
  const std::size_t k = std::min(opts.k, library.size());
  const auto random_members = [&] {
    std::vector<const ScenarioConfig*> out;
    for (std::size_t i = 0; i < k; ++i)
      out.push_back(&library.entry(static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(library.size()) - 1))).config);
    return out;
  };
  ValidationReport rep;
  for (const auto& h : held_out) {
    std::vector<const ScenarioConfig*> picked;
    if (opts.retrieval == RetrievalKind::Nearest) {
      for (const auto& n : library.retrieve(h.raw, k)) picked.push_back(&library.by_id(n.id).config);
    } else {
      picked = random_members();
    }
    const auto baseline = random_members();
    ValidationCase c{metric.distance(picked, h.config), metric.distance(baseline, h.config)};
    if (c.retrieved_distance < c.random_distance) ++rep.wins;
    else if (c.retrieved_distance > c.random_distance) ++rep.losses;
    else ++rep.ties;
    rep.cases.push_back(c);
  }
  const std::size_t decided = rep.wins + rep.losses;
  rep.win_fraction = decided ? static_cast<double>(rep.wins) / static_cast<double>(decided) : 0.5;
  rep.sign_test_p = sign_test_p_value(rep.wins, rep.losses);
  return rep;
}

}  // namespace episim
