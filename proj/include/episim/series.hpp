#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "episim/rng.hpp"

namespace episim {

enum class Resolution { Daily = 0, Weekly = 1, Monthly = 2 };

inline std::string_view to_string(Resolution r) {
  switch (r) {
    case Resolution::Daily: return "daily";
    case Resolution::Weekly: return "weekly";
    case Resolution::Monthly: return "monthly";
  }
  return "?";
}

inline Resolution parse_resolution(std::string_view s) {
  if (s == "daily") return Resolution::Daily;
  if (s == "weekly") return Resolution::Weekly;
  if (s == "monthly") return Resolution::Monthly;
  throw std::invalid_argument("unknown resolution '" + std::string(s) + "'");
}

struct Channel {
  std::string name;
  std::vector<double> values;
};

/// Reported counts on a regular grid. A missing entry is flagged in
/// `missing` and its value is meaningless.
struct ObservedSeries {
  Resolution resolution = Resolution::Daily;
  long start = 0;
  Count population = 0;
  std::vector<Channel> channels;
  std::vector<bool> missing;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().values.size(); }

  const Channel* find(std::string_view name) const {
    for (const auto& c : channels)
      if (c.name == name) return &c;
    return nullptr;
  }

  void validate() const {
    const auto n = length();
    for (const auto& c : channels)
      if (c.values.size() != n) throw std::invalid_argument("channel '" + c.name + "' has mismatched length");
    if (!missing.empty() && missing.size() != n) throw std::invalid_argument("missing mask length mismatch");
  }
};

/// Sums consecutive 7-entry blocks; a trailing partial week is dropped.
template <typename T>
std::vector<T> aggregate_weekly(std::span<const T> daily) {
  std::vector<T> weekly(daily.size() / 7, T{});
  for (std::size_t w = 0; w < weekly.size(); ++w)
    for (std::size_t d = 0; d < 7; ++d) weekly[w] += daily[w * 7 + d];
  return weekly;
}

inline ObservedSeries aggregate_weekly(const ObservedSeries& daily) {
  if (daily.resolution != Resolution::Daily)
    throw std::invalid_argument("aggregate_weekly: input must be daily");
  ObservedSeries out;
  out.resolution = Resolution::Weekly;
  out.start = daily.start / 7;
  out.population = daily.population;
  for (const auto& c : daily.channels)
    out.channels.push_back({c.name, aggregate_weekly<double>(c.values)});
  if (!daily.missing.empty()) {
    out.missing.assign(out.length(), false);
    for (std::size_t w = 0; w < out.missing.size(); ++w)
      for (std::size_t d = 0; d < 7; ++d) out.missing[w] = out.missing[w] || daily.missing[w * 7 + d];
  }
  return out;
}

enum class PreprocessRule { Accepted, TooManyMissing, TooShort };

inline std::string_view to_string(PreprocessRule r) {
  switch (r) {
    case PreprocessRule::Accepted: return "accepted";
    case PreprocessRule::TooManyMissing: return "excluded: >=10% missing";
    case PreprocessRule::TooShort: return "excluded: <=52 observations";
  }
  return "?";
}

struct PreprocessResult {
  PreprocessRule verdict = PreprocessRule::Accepted;
  std::vector<double> values;  // isolated gaps filled
  std::vector<bool> missing;   // points that remain missing after interpolation
  std::size_t interpolated = 0;

  bool accepted() const { return verdict == PreprocessRule::Accepted; }
};

inline constexpr std::size_t kMinObservationsExclusive = 52;
inline constexpr double kMaxMissingFraction = 0.10;

/// Linear interpolation of isolated gaps (a missing point whose two
/// neighbours are both present), then the exclusion rules: >=10% missing,
/// then <=52 observations. Longer gaps stay missing. The interpolated values
/// are returned even when the verdict is an exclusion.
inline PreprocessResult preprocess_series(std::span<const double> values, const std::vector<bool>& missing) {
  PreprocessResult r;
  r.values.assign(values.begin(), values.end());
  r.missing.assign(values.size(), false);
  std::size_t n_missing = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    r.missing[i] = i < missing.size() && missing[i];
    n_missing += r.missing[i];
  }
  const auto original = r.missing;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (original[i] && !original[i - 1] && !original[i + 1]) {
      r.values[i] = 0.5 * (values[i - 1] + values[i + 1]);
      r.missing[i] = false;
      ++r.interpolated;
    }
  }
  if (!values.empty() &&
      static_cast<double>(n_missing) >= kMaxMissingFraction * static_cast<double>(values.size())) {
    r.verdict = PreprocessRule::TooManyMissing;
  } else if (values.size() <= kMinObservationsExclusive) {
    r.verdict = PreprocessRule::TooShort;
  }
  return r;
}

}  // namespace episim
