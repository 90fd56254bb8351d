#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "episim/observation.hpp"
#include "episim/outcomes.hpp"
#include "episim/sim_core.hpp"
#include "episim/transmission.hpp"

namespace episim {

enum class Mode { HumanToHuman = 0, VectorBorne = 1, Waterborne = 2 };

inline constexpr std::array<Mode, 3> kAllModes = {Mode::HumanToHuman, Mode::VectorBorne,
                                                  Mode::Waterborne};

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::HumanToHuman: return "h2h";
    case Mode::VectorBorne: return "vector";
    case Mode::Waterborne: return "water";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "h2h" || s == "human-to-human") return Mode::HumanToHuman;
  if (s == "vector" || s == "vector-borne") return Mode::VectorBorne;
  if (s == "water" || s == "waterborne") return Mode::Waterborne;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

struct InitialConditions {
  double immune_fraction = 0.0;
  Count initial_infections = 0;
  Count initial_vector_exposures = 0;
  bool operator==(const InitialConditions&) const = default;
};

/// Full parameterization of one synthetic outbreak. This is the ground truth
/// that attribution tries to recover.
struct ScenarioConfig {
  Mode mode = Mode::HumanToHuman;
  Count population = 100000;
  long days = 2000;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  EpiParams epi;
  WaveSchedule beta = WaveSchedule::constant(0.2);
  VectorParams vector;
  WaterParams water;
  WaveSchedule delta = WaveSchedule::constant(0.0);

  SeasonalityConfig seasonality;
  SuperSpreadConfig superspread;
  InterventionConfig intervention;
  DemographicsConfig demographics;
  OutcomeConfig outcome;
  ObservationConfig observation;
  InitialConditions init;

  bool operator==(const ScenarioConfig&) const = default;
};

class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Calls `f(name, field)` for every serialized field in a fixed order.
template <typename Config, typename F>
void visit_config(Config& c, F&& f) {
  f("mode", c.mode);
  f("population", c.population);
  f("days", c.days);
  f("seed", c.seed);
  f("stream", c.stream);

  f("epi.sigma", c.epi.sigma);
  f("epi.gamma", c.epi.gamma);
  f("epi.gamma_a", c.epi.gamma_a);
  f("epi.omega", c.epi.omega);
  f("epi.p_a", c.epi.p_a);
  f("epi.alpha", c.epi.alpha);
  f("epi.has_latent", c.epi.has_latent);
  f("epi.has_asymptomatic", c.epi.has_asymptomatic);
  f("epi.has_waning", c.epi.has_waning);

  f("beta.change_days", c.beta.change_days);
  f("beta.values", c.beta.segment_values);

  f("vector.biting_rate", c.vector.biting_rate);
  f("vector.b_h", c.vector.b_h);
  f("vector.b_v", c.vector.b_v);
  f("vector.mu_v", c.vector.mu_v);
  f("vector.sigma_v", c.vector.sigma_v);
  f("vector.ratio", c.vector.vector_ratio);

  f("water.eta", c.water.eta);
  f("water.eta_a_relative", c.water.eta_a_relative);
  f("water.mu_w", c.water.mu_w);
  f("delta.change_days", c.delta.change_days);
  f("delta.values", c.delta.segment_values);

  f("seasonality.enabled", c.seasonality.enabled);
  f("seasonality.baseline", c.seasonality.baseline);
  f("seasonality.harmonics", c.seasonality.harmonics);
  f("seasonality.annual_jitter", c.seasonality.annual_jitter);
  f("seasonality.daily_noise_sd", c.seasonality.daily_noise_sd);

  f("superspread.p_ss", c.superspread.p_ss);
  f("superspread.shape", c.superspread.shape);
  f("superspread.scale", c.superspread.scale);

  f("intervention.enabled", c.intervention.enabled);
  f("intervention.on_threshold", c.intervention.on_threshold);
  f("intervention.off_threshold", c.intervention.off_threshold);
  f("intervention.reduction", c.intervention.reduction);
  f("intervention.water_reduction", c.intervention.water_reduction);
  f("intervention.trigger_delay", c.intervention.trigger_delay);
  f("intervention.min_duration", c.intervention.min_duration);
  f("intervention.max_duration", c.intervention.max_duration);
  f("intervention.consecutive_off_days", c.intervention.consecutive_off_days);

  f("demographics.enabled", c.demographics.enabled);
  f("demographics.birth_rate", c.demographics.birth_rate);
  f("demographics.death_rate", c.demographics.death_rate);
  f("demographics.importation_rate", c.demographics.importation_rate);

  f("outcome.p_hosp.change_days", c.outcome.p_hosp.change_days);
  f("outcome.p_hosp.values", c.outcome.p_hosp.segment_values);
  f("outcome.p_death.change_days", c.outcome.p_death.change_days);
  f("outcome.p_death.values", c.outcome.p_death.segment_values);
  f("outcome.hosp_delay.shape", c.outcome.hosp_delay.shape);
  f("outcome.hosp_delay.scale", c.outcome.hosp_delay.scale);
  f("outcome.death_delay.shape", c.outcome.death_delay.shape);
  f("outcome.death_delay.scale", c.outcome.death_delay.scale);
  f("outcome.max_delay", c.outcome.max_delay);

  f("observation.mult_noise_sd", c.observation.mult_noise_sd);
  f("observation.overdispersion", c.observation.overdispersion);
  f("observation.reporting.enabled", c.observation.reporting.enabled);
  f("observation.reporting.r0", c.observation.reporting.r0);
  f("observation.reporting.r_inf", c.observation.reporting.r_inf);
  f("observation.reporting.days_to_max", c.observation.reporting.days_to_max);
  f("observation.reporting.steepness", c.observation.reporting.steepness);
  f("observation.delays.enabled", c.observation.delays.enabled);
  f("observation.delays.initial_max", c.observation.delays.initial_max);
  f("observation.delays.final_max", c.observation.delays.final_max);
  f("observation.delays.alpha0", c.observation.delays.alpha0);
  f("observation.delays.alpha_inf", c.observation.delays.alpha_inf);
  f("observation.delays.days_to_max", c.observation.delays.days_to_max);
  f("observation.weekday.enabled", c.observation.weekday.enabled);
  f("observation.weekday.factors", c.observation.weekday.factors);
  f("observation.weekday.start_weekday", c.observation.weekday.start_weekday);
  f("observation.lab.enabled", c.observation.lab.enabled);
  f("observation.lab.mean_batch_size", c.observation.lab.mean_batch_size);
  f("observation.lab.bad_batch_rate", c.observation.lab.bad_batch_rate);
  f("observation.lab.accuracy_lo", c.observation.lab.accuracy_lo);
  f("observation.lab.accuracy_hi", c.observation.lab.accuracy_hi);

  f("init.immune_fraction", c.init.immune_fraction);
  f("init.initial_infections", c.init.initial_infections);
  f("init.initial_vector_exposures", c.init.initial_vector_exposures);
}

inline void append_double(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  out.append(buf, end);
}

struct FieldWriter {
  std::string& out;

  void key(std::string_view name) {
    out.append(name);
    out.append(" = ");
  }
  void operator()(std::string_view n, Mode m) { key(n); out.append(to_string(m)); out += '\n'; }
  void operator()(std::string_view n, bool b) { key(n); out.append(b ? "true" : "false"); out += '\n'; }
  void operator()(std::string_view n, double v) { key(n); append_double(out, v); out += '\n'; }
  template <std::integral T>
  void operator()(std::string_view n, T v) { key(n); out.append(std::to_string(v)); out += '\n'; }
  void operator()(std::string_view n, const std::optional<long>& v) {
    key(n);
    out.append(v ? std::to_string(*v) : "none");
    out += '\n';
  }
  template <typename T, std::size_t N>
  void operator()(std::string_view n, const std::array<T, N>& v) { list(n, v); }
  template <typename T>
  void operator()(std::string_view n, const std::vector<T>& v) { list(n, v); }
  void operator()(std::string_view n, const std::vector<Harmonic>& hs) {
    key(n);
    for (std::size_t i = 0; i < hs.size(); ++i) {
      if (i) out += ';';
      append_double(out, hs[i].amplitude);
      out += ':';
      append_double(out, hs[i].period);
      out += ':';
      append_double(out, hs[i].phase);
    }
    out += '\n';
  }

  template <typename Range>
  void list(std::string_view n, const Range& v) {
    key(n);
    bool first = true;
    for (const auto& x : v) {
      if (!first) out += ',';
      first = false;
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(x)>>) append_double(out, x);
      else out.append(std::to_string(x));
    }
    out += '\n';
  }
};

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  if (s.empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view text, std::string_view field) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigParseError("field '" + std::string(field) + "': cannot parse '" + std::string(text) + "'");
  return value;
}

struct FieldReader {
  const std::map<std::string, std::string, std::less<>>& values;

  std::string_view get(std::string_view name) const {
    auto it = values.find(name);
    if (it == values.end()) throw ConfigParseError("missing field '" + std::string(name) + "'");
    return it->second;
  }

  void operator()(std::string_view n, Mode& m) const {
    try {
      m = parse_mode(get(n));
    } catch (const std::invalid_argument& e) {
      throw ConfigParseError("field '" + std::string(n) + "': " + e.what());
    }
  }
  void operator()(std::string_view n, bool& b) const {
    const auto v = get(n);
    if (v == "true") b = true;
    else if (v == "false") b = false;
    else throw ConfigParseError("field '" + std::string(n) + "': expected true/false");
  }
  void operator()(std::string_view n, double& v) const { v = parse_number<double>(get(n), n); }
  template <std::integral T>
  void operator()(std::string_view n, T& v) const { v = parse_number<T>(get(n), n); }
  void operator()(std::string_view n, std::optional<long>& v) const {
    const auto text = get(n);
    if (text == "none") v.reset();
    else v = parse_number<long>(text, n);
  }
  template <typename T, std::size_t N>
  void operator()(std::string_view n, std::array<T, N>& v) const {
    const auto parts = split(get(n), ',');
    if (parts.size() != N) throw ConfigParseError("field '" + std::string(n) + "': wrong element count");
    for (std::size_t i = 0; i < N; ++i) v[i] = parse_number<T>(parts[i], n);
  }
  template <typename T>
  void operator()(std::string_view n, std::vector<T>& v) const {
    v.clear();
    for (auto p : split(get(n), ',')) v.push_back(parse_number<T>(p, n));
  }
  void operator()(std::string_view n, std::vector<Harmonic>& hs) const {
    hs.clear();
    for (auto item : split(get(n), ';')) {
      const auto parts = split(item, ':');
      if (parts.size() != 3) throw ConfigParseError("field '" + std::string(n) + "': bad harmonic");
      hs.push_back({parse_number<double>(parts[0], n), parse_number<double>(parts[1], n),
                    parse_number<double>(parts[2], n)});
    }
  }
};

}  // namespace detail

/// Canonical `key = value` text, one field per line, fixed order. Doubles
/// use the shortest representation that parses back to the same bits.
inline std::string serialize_config(const ScenarioConfig& cfg) {
  std::string out;
  detail::FieldWriter writer{out};
  detail::visit_config(cfg, writer);
  return out;
}

inline std::map<std::string, std::string, std::less<>> parse_key_values(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string_view::npos)
      throw ConfigParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    kv.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 3)));
  }
  return kv;
}

inline ScenarioConfig parse_config(std::string_view text) {
  const auto kv = parse_key_values(text);
  ScenarioConfig cfg;
  detail::FieldReader reader{kv};
  detail::visit_config(cfg, reader);
  try {
    cfg.beta.validate();
    cfg.delta.validate();
    cfg.outcome.p_hosp.validate();
    cfg.outcome.p_death.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigParseError(e.what());
  }
  return cfg;
}

}  // namespace episim
