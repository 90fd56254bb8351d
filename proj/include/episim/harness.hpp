#pragma once

#include <functional>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "episim/ets.hpp"
#include "episim/metrics.hpp"

namespace episim {

/// A forecaster sees only the context (oldest first) and returns H steps.
using Forecaster = std::function<ForecastQuantiles(std::span<const double> context, std::size_t horizon)>;

struct HarnessOptions {
  std::size_t context_cap = 112;
  std::size_t min_context = 26;
  std::vector<std::size_t> horizons = {2, 4, 6, 8};
  std::size_t stride = 1;
};

struct EvalRecord {
  std::string series_id;
  std::size_t window_start = 0;  // forecast origin: index of the first unseen point
  std::size_t horizon = 0;
  double observed = 0.0;
  QuantileRow quantiles{};
  double point_error = 0.0;  // median minus observed
  double mean_pinball = 0.0;
  bool hit50 = false;
  bool hit90 = false;
};

struct EvalSummary {
  std::size_t records = 0;
  double mae = 0.0;
  double mape = 0.0;
  std::size_t mape_skipped = 0;
  double mean_pinball = 0.0;
  double coverage50 = 0.0;
  double coverage90 = 0.0;
};

struct EvalReport {
  std::string verdict = "ok";
  std::size_t windows = 0;
  std::size_t skipped_windows = 0;
  std::vector<EvalRecord> records;

  EvalSummary summary() const { return summarize(records); }

  static EvalSummary summarize(std::span<const EvalRecord> records) {
    EvalSummary s;
    s.records = records.size();
    std::size_t mape_n = 0;
    for (const auto& r : records) {
      s.mae += std::abs(r.point_error);
      s.mean_pinball += r.mean_pinball;
      s.coverage50 += r.hit50;
      s.coverage90 += r.hit90;
      if (r.observed == 0.0) {
        ++s.mape_skipped;
      } else {
        s.mape += std::abs(r.point_error / r.observed);
        ++mape_n;
      }
    }
    if (s.records) {
      const double n = static_cast<double>(s.records);
      s.mae /= n;
      s.mean_pinball /= n;
      s.coverage50 /= n;
      s.coverage90 /= n;
    }
    s.mape = mape_n ? 100.0 * s.mape / static_cast<double>(mape_n) : 0.0;
    return s;
  }

  EvalSummary summary_for_horizon(std::size_t h) const {
    std::vector<EvalRecord> sel;
    for (const auto& r : records)
      if (r.horizon == h) sel.push_back(r);
    return summarize(sel);
  }
};

inline std::size_t window_count(std::size_t length, const HarnessOptions& opts) {
  std::size_t max_h = 0;
  for (auto h : opts.horizons) max_h = std::max(max_h, h);
  if (length < opts.min_context + max_h) return 0;
  return (length - opts.min_context - max_h) / opts.stride + 1;
}

/// Rolling-origin evaluation. Windows whose context or targets touch a
/// missing point are skipped and counted.
inline EvalReport rolling_harness(std::span<const double> series, const Forecaster& forecaster,
                                  const HarnessOptions& opts = {}, const std::vector<bool>& missing = {},
                                  const std::string& series_id = "series") {
  if (opts.horizons.empty() || opts.stride == 0 || opts.min_context == 0)
    throw std::invalid_argument("harness needs horizons, a positive stride and a positive minimum context");
  EvalReport report;
  std::size_t max_h = 0;
  for (auto h : opts.horizons) {
    if (h == 0) throw std::invalid_argument("horizons are 1-based");
    max_h = std::max(max_h, h);
  }
  const auto n_windows = window_count(series.size(), opts);
  if (n_windows == 0) {
    report.verdict = "series too short: " + std::to_string(series.size()) + " points, need " +
                     std::to_string(opts.min_context + max_h);
    return report;
  }
  const auto is_missing = [&](std::size_t i) { return i < missing.size() && missing[i]; };
  for (std::size_t w = 0; w < n_windows; ++w) {
    const std::size_t origin = opts.min_context + w * opts.stride;
    const std::size_t begin = origin > opts.context_cap ? origin - opts.context_cap : 0;
    bool clean = true;
    for (std::size_t i = begin; i < origin + max_h && clean; ++i) clean = !is_missing(i);
    if (!clean) {
      ++report.skipped_windows;
      continue;
    }
    ++report.windows;
    auto fc = forecaster(series.subspan(begin, origin - begin), max_h);
    if (fc.horizon() != max_h) throw std::runtime_error("forecaster returned the wrong horizon");
    if (!fc.monotone()) fc.rearrange();
    for (auto h : opts.horizons) {
      EvalRecord r;
      r.series_id = series_id;
      r.window_start = origin;
      r.horizon = h;
      r.observed = series[origin + h - 1];
      r.quantiles = fc.steps[h - 1];
      r.point_error = r.quantiles[kMedianIndex] - r.observed;
      r.mean_pinball = row_quantile_loss(r.quantiles, r.observed);
      r.hit50 = interval_hit(r.quantiles, r.observed, 0.5);
      r.hit90 = interval_hit(r.quantiles, r.observed, 0.9);
      report.records.push_back(r);
    }
  }
  return report;
}

inline Forecaster persistence_forecaster() {
  return [](std::span<const double> ctx, std::size_t h) { return persistence_forecast(ctx, h); };
}

/// ETS baseline. The spec is selected by AIC on the first context it sees
/// and kept; parameters are refitted for every later window. If the chosen
/// spec becomes infeasible for a window, that window is re-selected.
inline Forecaster ets_forecaster(int season_length, EtsOptions opts = {}, EtsForecastOptions fopts = {}) {
  auto chosen = std::make_shared<std::optional<EtsSpec>>();
  return [=](std::span<const double> ctx, std::size_t h) {
    std::optional<EtsFit> fit;
    if (*chosen) fit = ets_fit(ctx, **chosen, opts);
    if (!fit) {
      fit = ets_select(ctx, season_length, opts);
      if (!*chosen) *chosen = fit->spec;
    }
    return ets_forecast(*fit, h, fopts);
  };
}

inline std::string format_quantile_level(double q) {
  std::ostringstream s;
  s << q;
  return s.str();
}

inline std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "series_id,window_start,horizon,observed,median,abs_error,ape,mean_pinball,hit50,hit90";
  for (double q : kQuantileLevels) out << ",q" << format_quantile_level(q);
  out << '\n';
  for (const auto& r : report.records) {
    out << r.series_id << ',' << r.window_start << ',' << r.horizon << ',' << r.observed << ','
        << r.quantiles[kMedianIndex] << ',' << std::abs(r.point_error) << ',';
    if (r.observed != 0.0) out << std::abs(r.point_error / r.observed);
    out << ',' << r.mean_pinball << ',' << r.hit50 << ',' << r.hit90;
    for (double v : r.quantiles) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

inline std::string report_summary(const EvalReport& report, const std::vector<std::size_t>& horizons) {
  std::ostringstream out;
  out << std::setprecision(6);
  const auto line = [&](const std::string& label, const EvalSummary& s) {
    out << label << ": n=" << s.records << " MAE=" << s.mae << " MAPE=" << s.mape << "% (zeros skipped "
        << s.mape_skipped << ") pinball=" << s.mean_pinball << " cov50=" << s.coverage50
        << " cov90=" << s.coverage90 << '\n';
  };
  out << "verdict: " << report.verdict << '\n';
  out << "windows: " << report.windows << " (skipped " << report.skipped_windows << ")\n";
  line("all", report.summary());
  for (auto h : horizons) line("h=" + std::to_string(h), report.summary_for_horizon(h));
  return out.str();
}

}  // namespace episim
