#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace episim {

inline constexpr std::array<double, 9> kQuantileLevels = {0.05, 0.1, 0.25, 0.4, 0.5,
                                                         0.6,  0.75, 0.9, 0.95};
inline constexpr std::size_t kMedianIndex = 4;
inline constexpr std::size_t kQ05 = 0, kQ25 = 2, kQ75 = 6, kQ95 = 8;

using QuantileRow = std::array<double, kQuantileLevels.size()>;

/// Forecast for steps 1..H, one row of nine quantiles per step.
struct ForecastQuantiles {
  std::vector<QuantileRow> steps;

  std::size_t horizon() const { return steps.size(); }
  double median(std::size_t step) const { return steps.at(step)[kMedianIndex]; }

  /// Monotone rearrangement: sorting each row is the rearrangement that
  /// restores non-decreasing quantiles.
  void rearrange() {
    for (auto& row : steps) std::sort(row.begin(), row.end());
  }

  bool monotone() const {
    for (const auto& row : steps)
      if (!std::is_sorted(row.begin(), row.end())) return false;
    return true;
  }
};

inline double pinball_loss(double y, double q_hat, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
  const double e = y - q_hat;
  return std::max(q * e, (q - 1.0) * e);
}

inline double row_quantile_loss(const QuantileRow& row, double y) {
  double s = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) s += pinball_loss(y, row[i], kQuantileLevels[i]);
  return s / static_cast<double>(row.size());
}

/// Mean of the pinball loss over forecasts x steps x quantile levels.
/// observations[b][h] pairs with forecasts[b].steps[h].
inline double mean_quantile_loss(std::span<const ForecastQuantiles> forecasts,
                                 std::span<const std::vector<double>> observations) {
  if (forecasts.size() != observations.size()) throw std::invalid_argument("batch size mismatch");
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t b = 0; b < forecasts.size(); ++b) {
    if (forecasts[b].horizon() != observations[b].size())
      throw std::invalid_argument("horizon mismatch in batch element " + std::to_string(b));
    for (std::size_t h = 0; h < observations[b].size(); ++h) {
      total += row_quantile_loss(forecasts[b].steps[h], observations[b][h]);
      ++n;
    }
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

inline bool interval_hit(const QuantileRow& row, double y, double level) {
  if (level == 0.5) return row[kQ25] <= y && y <= row[kQ75];
  if (level == 0.9) return row[kQ05] <= y && y <= row[kQ95];
  throw std::invalid_argument("interval level must be 0.5 or 0.9");
}

/// Fraction of observations inside the closed central interval
/// ([q25,q75] for 0.5, [q5,q95] for 0.9).
inline double interval_coverage(std::span<const ForecastQuantiles> forecasts,
                                std::span<const std::vector<double>> observations, double level) {
  if (forecasts.size() != observations.size()) throw std::invalid_argument("batch size mismatch");
  std::size_t hits = 0, n = 0;
  for (std::size_t b = 0; b < forecasts.size(); ++b) {
    if (forecasts[b].horizon() != observations[b].size())
      throw std::invalid_argument("horizon mismatch in batch element " + std::to_string(b));
    for (std::size_t h = 0; h < observations[b].size(); ++h) {
      hits += interval_hit(forecasts[b].steps[h], observations[b][h], level);
      ++n;
    }
  }
  return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
}

inline ForecastQuantiles persistence_forecast(std::span<const double> context, std::size_t horizon) {
  if (context.empty()) throw std::invalid_argument("persistence forecast needs a non-empty context");
  ForecastQuantiles f;
  QuantileRow row;
  row.fill(context.back());
  f.steps.assign(horizon, row);
  return f;
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
inline double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline QuantileRow empirical_quantiles(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  QuantileRow row;
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = sorted_quantile(sample, kQuantileLevels[i]);
  return row;
}

}  // namespace episim
