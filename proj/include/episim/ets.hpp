#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <compare>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "episim/metrics.hpp"
#include "episim/rng.hpp"

namespace episim {

enum class EtsError { Additive, Multiplicative };
enum class EtsTrend { None, Additive, AdditiveDamped, Multiplicative, MultiplicativeDamped };
enum class EtsSeason { None, Additive, Multiplicative };

struct EtsSpec {
  EtsError error = EtsError::Additive;
  EtsTrend trend = EtsTrend::None;
  EtsSeason season = EtsSeason::None;
  int m = 1;

  bool has_trend() const { return trend != EtsTrend::None; }
  bool damped() const { return trend == EtsTrend::AdditiveDamped || trend == EtsTrend::MultiplicativeDamped; }
  bool multiplicative_trend() const {
    return trend == EtsTrend::Multiplicative || trend == EtsTrend::MultiplicativeDamped;
  }
  bool has_season() const { return season != EtsSeason::None; }
  bool needs_positive_data() const {
    return error == EtsError::Multiplicative || multiplicative_trend() || season == EtsSeason::Multiplicative;
  }
  /// Additive error with additive or absent trend and season.
  bool linear() const {
    return error == EtsError::Additive && !multiplicative_trend() && season != EtsSeason::Multiplicative;
  }

  std::string label() const {
    static constexpr const char* kTrend[] = {"N", "A", "Ad", "M", "Md"};
    static constexpr const char* kSeason[] = {"N", "A", "M"};
    return std::string(error == EtsError::Additive ? "A" : "M") + "," + kTrend[static_cast<int>(trend)] + "," +
           kSeason[static_cast<int>(season)];
  }

  auto operator<=>(const EtsSpec&) const = default;
};

/// The 2 x 5 x 3 grid in lexicographic (error, trend, season) order.
inline std::vector<EtsSpec> all_ets_specs(int m) {
  std::vector<EtsSpec> specs;
  for (int e = 0; e < 2; ++e)
    for (int t = 0; t < 5; ++t)
      for (int s = 0; s < 3; ++s)
        specs.push_back({static_cast<EtsError>(e), static_cast<EtsTrend>(t), static_cast<EtsSeason>(s), m});
  return specs;
}

struct EtsParams {
  double alpha = 0.5;
  double beta = 0.1;
  double gamma = 0.1;
  double phi = 0.9;
  double l0 = 0.0;
  double b0 = 0.0;
  std::vector<double> s0;  // s0[j] is the seasonal term for time j (mod m)
};

inline constexpr double kSmoothingLo = 1e-4;
inline constexpr double kSmoothingHi = 1.0 - 1e-4;
inline constexpr double kPhiLo = 0.8;
inline constexpr double kPhiHi = 0.98;

struct EtsState {
  double level = 0.0;
  double trend = 0.0;
  std::vector<double> season;  // ring indexed by time mod m
};

struct EtsFit {
  EtsSpec spec;
  EtsParams params;
  EtsState state;  // after the last observation
  std::size_t n = 0;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  double sigma2 = 0.0;
  double aic = std::numeric_limits<double>::infinity();
  int k = 0;
  std::vector<double> fitted;

  double slope() const { return state.trend; }
};

namespace detail {

/// Level forecast with the trend applied over `h` steps.
inline double trend_path(const EtsSpec& spec, double l, double b, double phi, int h) {
  double damp = 0.0, p = 1.0;
  for (int j = 1; j <= h; ++j) {
    p *= spec.damped() ? phi : 1.0;
    damp += p;
  }
  switch (spec.trend) {
    case EtsTrend::None: return l;
    case EtsTrend::Additive: return l + h * b;
    case EtsTrend::AdditiveDamped: return l + damp * b;
    case EtsTrend::Multiplicative: return l * std::pow(b, h);
    case EtsTrend::MultiplicativeDamped: return l * std::pow(b, damp);
  }
  return l;
}

inline double apply_season(const EtsSpec& spec, double q, double s) {
  switch (spec.season) {
    case EtsSeason::None: return q;
    case EtsSeason::Additive: return q + s;
    case EtsSeason::Multiplicative: return q * s;
  }
  return q;
}

/// One observation update in Holt-Winters form; q is the one-step level-trend
/// forecast. Returns false if the state leaves the admissible region.
inline bool ets_update(const EtsSpec& spec, const EtsParams& p, EtsState& st, std::size_t t, double y, double q) {
  const std::size_t slot = spec.has_season() ? t % static_cast<std::size_t>(spec.m) : 0;
  const double s = spec.has_season() ? st.season[slot] : 0.0;
  double deseason = y;
  if (spec.season == EtsSeason::Additive) deseason = y - s;
  else if (spec.season == EtsSeason::Multiplicative) deseason = y / s;
  const double old_level = st.level;
  st.level = p.alpha * deseason + (1.0 - p.alpha) * q;
  if (spec.has_trend()) {
    const double damp = spec.damped() ? p.phi : 1.0;
    if (spec.multiplicative_trend()) {
      if (!(old_level > 0.0) || !(st.level > 0.0)) return false;
      st.trend = p.beta * (st.level / old_level) + (1.0 - p.beta) * std::pow(st.trend, damp);
    } else {
      st.trend = p.beta * (st.level - old_level) + (1.0 - p.beta) * damp * st.trend;
    }
  }
  if (spec.season == EtsSeason::Additive) st.season[slot] = p.gamma * (y - q) + (1.0 - p.gamma) * s;
  else if (spec.season == EtsSeason::Multiplicative) st.season[slot] = p.gamma * (y / q) + (1.0 - p.gamma) * s;
  return std::isfinite(st.level) && std::isfinite(st.trend);
}

inline double one_step(const EtsSpec& spec, const EtsParams& p, const EtsState& st, std::size_t t, double& q) {
  q = trend_path(spec, st.level, st.trend, p.phi, 1);
  const double s = spec.has_season() ? st.season[t % static_cast<std::size_t>(spec.m)] : 0.0;
  return apply_season(spec, q, s);
}

inline int parameter_count(const EtsSpec& spec) {
  int k = 1 + 1 + 1;  // alpha, l0, variance
  if (spec.has_trend()) k += 2;
  if (spec.damped()) k += 1;
  if (spec.has_season()) k += 1 + (spec.m - 1);
  return k;
}

}  // namespace detail

/// Runs the filter with fixed parameters and computes the Gaussian
/// innovations likelihood. Multiplicative error adds the -sum log|yhat| term.
inline EtsFit ets_filter(std::span<const double> y, const EtsSpec& spec, const EtsParams& params) {
  EtsFit fit;
  fit.spec = spec;
  fit.params = params;
  fit.n = y.size();
  fit.k = detail::parameter_count(spec);
  EtsState st{params.l0, spec.has_trend() ? params.b0 : 0.0, params.s0};
  if (spec.has_season() && st.season.size() != static_cast<std::size_t>(spec.m))
    throw std::invalid_argument("seasonal initial state must have m entries");
  double scale = 0.0;
  for (double v : y) scale += std::abs(v);
  scale = y.empty() ? 1.0 : std::max(scale / static_cast<double>(y.size()), 1e-8);

  double sse = 0.0, log_yhat = 0.0;
  fit.fitted.reserve(y.size());
  bool ok = true;
  for (std::size_t t = 0; t < y.size() && ok; ++t) {
    double q = 0.0;
    const double yhat = detail::one_step(spec, params, st, t, q);
    if (!std::isfinite(yhat) || (spec.needs_positive_data() && !(yhat > 0.0))) {
      ok = false;
      break;
    }
    fit.fitted.push_back(yhat);
    if (spec.error == EtsError::Additive) {
      sse += (y[t] - yhat) * (y[t] - yhat);
    } else {
      const double e = (y[t] - yhat) / yhat;
      sse += e * e;
      log_yhat += std::log(std::abs(yhat));
    }
    ok = detail::ets_update(spec, params, st, t, y[t], q);
  }
  fit.state = std::move(st);
  if (!ok) return fit;
  const double n = static_cast<double>(y.size());
  const double floor = spec.error == EtsError::Additive ? 1e-24 * scale * scale : 1e-24;
  fit.sigma2 = std::max(sse / n, floor);
  fit.log_likelihood = -0.5 * n * (std::log(2.0 * std::numbers::pi * fit.sigma2) + 1.0) - log_yhat;
  fit.aic = 2.0 * fit.k - 2.0 * fit.log_likelihood;
  return fit;
}

/// Feasibility of a spec for a series: length >= max(10, 2m) for seasonal
/// specs (10 otherwise), positive data for multiplicative components, and
/// fewer free parameters than observations.
inline bool ets_feasible(std::span<const double> y, const EtsSpec& spec) {
  const std::size_t min_len = spec.has_season() ? std::max<std::size_t>(10, 2 * static_cast<std::size_t>(spec.m)) : 10;
  if (y.size() < min_len) return false;
  if (spec.has_season() && spec.m < 2) return false;
  if (static_cast<std::size_t>(detail::parameter_count(spec)) >= y.size()) return false;
  if (spec.needs_positive_data())
    for (double v : y)
      if (!(v > 0.0)) return false;
  return true;
}

namespace detail {

struct EtsStart {
  double level = 0.0, trend = 0.0, level_scale = 1.0, trend_scale = 1.0;
  std::vector<double> season;
};

/// Starting states. Seasonal terms come from the first two seasons
/// (deviations or ratios from each season's mean) and stay fixed during
/// optimization; level and trend start from simple moment estimates.
inline EtsStart initial_states(std::span<const double> y, const EtsSpec& spec) {
  EtsStart s;
  const std::size_t n = y.size();
  double mean_abs = 0.0;
  for (double v : y) mean_abs += std::abs(v);
  mean_abs = std::max(mean_abs / static_cast<double>(n), 1e-8);
  if (spec.has_season()) {
    const auto m = static_cast<std::size_t>(spec.m);
    double a0 = 0.0, a1 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      a0 += y[j];
      a1 += y[m + j];
    }
    a0 /= static_cast<double>(m);
    a1 /= static_cast<double>(m);
    s.season.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (spec.season == EtsSeason::Additive) s.season[j] = 0.5 * ((y[j] - a0) + (y[m + j] - a1));
      else s.season[j] = 0.5 * (y[j] / a0 + y[m + j] / a1);
    }
    double c = 0.0;
    for (double v : s.season) c += v;
    c /= static_cast<double>(m);
    for (double& v : s.season) v = spec.season == EtsSeason::Additive ? v - c : v / c;
    s.level = a0;
    s.trend = spec.multiplicative_trend() ? std::pow(a1 / a0, 1.0 / static_cast<double>(m))
                                          : (a1 - a0) / static_cast<double>(m);
  } else {
    const std::size_t k = std::min<std::size_t>(n - 1, 10);
    s.level = y[0];
    s.trend = spec.multiplicative_trend() ? std::pow(y[k] / y[0], 1.0 / static_cast<double>(k))
                                          : (y[k] - y[0]) / static_cast<double>(k);
  }
  s.level_scale = std::max(0.1 * mean_abs, 1e-6);
  s.trend_scale = std::max(0.01 * mean_abs, 1e-6);
  if (spec.multiplicative_trend() && !(s.trend > 0.0)) s.trend = 1.0;
  return s;
}

inline double squash(double x, double lo, double hi) { return lo + (hi - lo) / (1.0 + std::exp(-x)); }
inline double unsquash(double v, double lo, double hi) {
  const double u = std::clamp((v - lo) / (hi - lo), 1e-9, 1.0 - 1e-9);
  return std::log(u / (1.0 - u));
}

/// Unconstrained coordinates <-> parameters. Layout: alpha, [beta], [gamma],
/// [phi], level, [trend].
struct EtsCoordinates {
  EtsSpec spec;
  EtsStart start;

  std::size_t dim() const {
    return 2 + (spec.has_trend() ? 2 : 0) + (spec.has_season() ? 1 : 0) + (spec.damped() ? 1 : 0);
  }

  EtsParams decode(const double* x) const {
    EtsParams p;
    std::size_t i = 0;
    p.alpha = squash(x[i++], kSmoothingLo, kSmoothingHi);
    if (spec.has_trend()) p.beta = squash(x[i++], kSmoothingLo, kSmoothingHi);
    if (spec.has_season()) p.gamma = squash(x[i++], kSmoothingLo, kSmoothingHi);
    if (spec.damped()) p.phi = squash(x[i++], kPhiLo, kPhiHi);
    const bool positive_level = spec.needs_positive_data();
    p.l0 = positive_level ? start.level * std::exp(x[i++]) : start.level + start.level_scale * x[i++];
    if (spec.has_trend())
      p.b0 = spec.multiplicative_trend() ? start.trend * std::exp(x[i++]) : start.trend + start.trend_scale * x[i++];
    p.s0 = start.season;
    return p;
  }

  std::vector<double> encode(double alpha, double beta, double gamma, double phi) const {
    std::vector<double> x;
    x.push_back(unsquash(alpha, kSmoothingLo, kSmoothingHi));
    if (spec.has_trend()) x.push_back(unsquash(beta, kSmoothingLo, kSmoothingHi));
    if (spec.has_season()) x.push_back(unsquash(gamma, kSmoothingLo, kSmoothingHi));
    if (spec.damped()) x.push_back(unsquash(phi, kPhiLo, kPhiHi));
    x.push_back(0.0);
    if (spec.has_trend()) x.push_back(0.0);
    return x;
  }
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
};

/// GSL simplex minimization from x0 with unit initial steps.
inline NelderMeadResult nelder_mead(const std::function<double(const double*)>& f, std::vector<double> x0,
                                    int max_iter, double size_tol) {
  gsl_set_error_handler_off();
  const std::size_t n = x0.size();
  gsl_multimin_function fn;
  fn.n = n;
  fn.params = const_cast<std::function<double(const double*)>*>(&f);
  fn.f = [](const gsl_vector* v, void* params) {
    const auto& g = *static_cast<const std::function<double(const double*)>*>(params);
    const double r = g(v->data);
    return std::isfinite(r) ? r : 1e300;
  };
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, x0[i]);
    gsl_vector_set(step, i, 0.5);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), size_tol) == GSL_SUCCESS) break;
  }
  NelderMeadResult r;
  r.x.assign(s->x->data, s->x->data + n);
  r.value = s->fval;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return r;
}

}  // namespace detail

struct EtsOptions {
  int restarts = 10;
  int max_iter = 2000;
  double size_tol = 1e-9;
  std::uint64_t seed = 0x455453;
};

/// Maximum-likelihood fit over smoothing parameters and initial level/trend.
/// Returns nullopt when the spec is infeasible for the series.
inline std::optional<EtsFit> ets_fit(std::span<const double> y, const EtsSpec& spec, const EtsOptions& opts = {}) {
  if (!ets_feasible(y, spec)) return std::nullopt;
  detail::EtsCoordinates coords{spec, detail::initial_states(y, spec)};
  const std::function<double(const double*)> objective = [&](const double* x) {
    return -ets_filter(y, spec, coords.decode(x)).log_likelihood;
  };
  RngStream rng(opts.seed, 0);
  std::optional<EtsFit> best;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    std::vector<double> x0 = r == 0 ? coords.encode(0.5, 0.1, 0.1, 0.9)
                                    : coords.encode(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.5),
                                                    rng.uniform(0.05, 0.5), rng.uniform(0.81, 0.97));
    const auto res = detail::nelder_mead(objective, x0, opts.max_iter, opts.size_tol);
    auto fit = ets_filter(y, spec, coords.decode(res.x.data()));
    if (!std::isfinite(fit.log_likelihood)) continue;
    if (!best || fit.log_likelihood > best->log_likelihood) best = std::move(fit);
  }
  return best;
}

/// True when `a` should be preferred over `b`: lower AIC, then fewer
/// parameters, then earlier spec in lexicographic order.
inline bool ets_better(const EtsFit& a, const EtsFit& b) {
  if (a.aic != b.aic) return a.aic < b.aic;
  if (a.k != b.k) return a.k < b.k;
  return a.spec < b.spec;
}

class EtsSelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fits every feasible spec of the grid and returns the minimum-AIC fit.
inline EtsFit ets_select(std::span<const double> y, int m, const EtsOptions& opts = {},
                         std::vector<EtsFit>* all_fits = nullptr) {
  std::optional<EtsFit> best;
  for (const auto& spec : all_ets_specs(m)) {
    auto fit = ets_fit(y, spec, opts);
    if (!fit) continue;
    if (all_fits) all_fits->push_back(*fit);
    if (!best || ets_better(*fit, *best)) best = std::move(fit);
  }
  if (!best) throw EtsSelectionError("no feasible ETS specification for this series");
  return *best;
}

struct EtsForecastOptions {
  int sample_paths = 1000;
  std::uint64_t seed = 0x455453;
};

/// Point path obtained by propagating the final state.
inline std::vector<double> ets_point_forecast(const EtsFit& fit, std::size_t horizon) {
  std::vector<double> out(horizon);
  const auto& st = fit.state;
  for (std::size_t h = 1; h <= horizon; ++h) {
    const double q = detail::trend_path(fit.spec, st.level, st.trend, fit.params.phi, static_cast<int>(h));
    const double s = fit.spec.has_season() ? st.season[(fit.n + h - 1) % static_cast<std::size_t>(fit.spec.m)] : 0.0;
    out[h - 1] = detail::apply_season(fit.spec, q, s);
  }
  return out;
}

/// Forecast variance for the linear class, sigma^2 (1 + sum_{j<h} c_j^2).
inline std::vector<double> ets_linear_variance(const EtsFit& fit, std::size_t horizon) {
  if (!fit.spec.linear()) throw std::invalid_argument("analytic variance needs a linear ETS spec");
  const auto& p = fit.params;
  const double beta_innov = p.alpha * p.beta;
  std::vector<double> v(horizon);
  double acc = 0.0;
  for (std::size_t h = 1; h <= horizon; ++h) {
    v[h - 1] = fit.sigma2 * (1.0 + acc);
    const double j = static_cast<double>(h);
    double c = p.alpha;
    if (fit.spec.trend == EtsTrend::Additive) c += beta_innov * j;
    else if (fit.spec.trend == EtsTrend::AdditiveDamped) c += beta_innov * p.phi * (1.0 - std::pow(p.phi, j)) / (1.0 - p.phi);
    if (fit.spec.has_season() && h % static_cast<std::size_t>(fit.spec.m) == 0) c += p.gamma;
    acc += c * c;
  }
  return v;
}

inline ForecastQuantiles ets_forecast(const EtsFit& fit, std::size_t horizon, const EtsForecastOptions& opts = {}) {
  ForecastQuantiles f;
  f.steps.resize(horizon);
  const auto point = ets_point_forecast(fit, horizon);
  if (fit.spec.linear()) {
    const auto var = ets_linear_variance(fit, horizon);
    const boost::math::normal_distribution<double> z;
    for (std::size_t h = 0; h < horizon; ++h)
      for (std::size_t i = 0; i < kQuantileLevels.size(); ++i)
        f.steps[h][i] = point[h] + boost::math::quantile(z, kQuantileLevels[i]) * std::sqrt(var[h]);
    return f;
  }
  RngStream rng(opts.seed, 1);
  const double sd = std::sqrt(fit.sigma2);
  std::vector<std::vector<double>> paths(horizon, std::vector<double>(static_cast<std::size_t>(opts.sample_paths)));
  for (int path = 0; path < opts.sample_paths; ++path) {
    EtsState st = fit.state;
    for (std::size_t h = 0; h < horizon; ++h) {
      const std::size_t t = fit.n + h;
      double q = 0.0;
      const double yhat = detail::one_step(fit.spec, fit.params, st, t, q);
      const double e = rng.normal(0.0, sd);
      const double y = fit.spec.error == EtsError::Additive ? yhat + e : yhat * (1.0 + e);
      paths[h][static_cast<std::size_t>(path)] = y;
      if (!detail::ets_update(fit.spec, fit.params, st, t, y, q)) {
        // Path left the admissible region; hold it at its last value.
        for (std::size_t r = h + 1; r < horizon; ++r) paths[r][static_cast<std::size_t>(path)] = y;
        break;
      }
    }
  }
  for (std::size_t h = 0; h < horizon; ++h) f.steps[h] = empirical_quantiles(std::move(paths[h]));
  return f;
}

/// Default season length for a reporting cadence.
inline int default_season_length(bool weekly) { return weekly ? 52 : 12; }

}  // namespace episim
