#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace episim {

using Count = std::int64_t;

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256** keyed by (seed, stream_id).
///
/// The state is a pure function of the key, so every scenario can own an
/// independent stream without coordinating with other workers. All draws
/// go through the Boost.Random distribution implementations, which are
/// fixed code rather than implementation-defined like <random>.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t mix = seed ^ detail::rotl(stream_id * 0xd1342543de82ef95ULL, 17);
    mix ^= 0x6a09e667f3bcc909ULL;
    for (auto& word : state_) word = detail::splitmix64(mix);
    // stream id is mixed in twice so swapped (seed, stream) keys differ.
    std::uint64_t tail = stream_id;
    state_[3] ^= detail::splitmix64(tail);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Independent child stream. Depends only on this stream's key and `tag`,
  /// never on how many draws were already taken.
  RngStream derive(std::uint64_t tag) const noexcept {
    std::uint64_t mix = stream_id_ * 0x9e3779b97f4a7c15ULL + tag + 1;
    return RngStream(seed_ ^ detail::splitmix64(mix), stream_id_ + (tag << 32) + tag);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>((*this)());
    // Lemire's nearly-divisionless rejection.
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * span;
    auto low = static_cast<std::uint64_t>(m);
    if (low < span) {
      const std::uint64_t threshold = (0 - span) % span;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * span;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return lo + static_cast<std::int64_t>(m >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  double normal(double mean, double sd) {
    if (sd <= 0.0) return mean;
    return boost::random::normal_distribution<double>(mean, sd)(*this);
  }

  double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

  /// Gamma with shape k and scale theta.
  double gamma(double shape, double scale) {
    if (shape <= 0.0 || scale <= 0.0) return 0.0;
    return boost::random::gamma_distribution<double>(shape, scale)(*this);
  }

  double beta(double a, double b) {
    return boost::random::beta_distribution<double>(a, b)(*this);
  }

  Count poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    return boost::random::poisson_distribution<Count, double>(mean)(*this);
  }

  Count binomial(Count n, double p) {
    if (n <= 0 || !(p > 0.0)) return 0;
    if (p >= 1.0) return n;
    return boost::random::binomial_distribution<Count, double>(n, p)(*this);
  }

  /// Failures before `n` successes with success probability p (real n
  /// allowed), drawn as a gamma-Poisson mixture.
  Count negative_binomial(double n, double p) {
    if (!(n > 0.0) || p >= 1.0) return 0;
    return poisson(gamma(n, (1.0 - p) / p));
  }

  /// Number of failures before the first success.
  Count geometric(double p) {
    if (p >= 1.0) return 0;
    if (!(p > 0.0)) return std::numeric_limits<Count>::max();
    const double u = 1.0 - uniform();  // (0, 1]
    return static_cast<Count>(std::floor(std::log(u) / std::log1p(-p)));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace episim
