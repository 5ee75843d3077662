#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vph/core.hpp"

namespace vph {

enum class ResidualOrigin : std::uint8_t { kept, superposed };

struct SuperThinResult {
  std::vector<double> times;
  std::vector<ResidualOrigin> origin;
  /// 1 - exp(-b r_k) for the gaps r_k between residuals (t_0 = 0).
  std::vector<double> standardized_u;
  double b = 0.0;
  double window_end = 0.0;
};

/// Super-thinning: keeps each event with probability min(1, b / lambda(tau_i))
/// and superposes a Poisson process of rate max(0, b - lambda(t)), drawn by
/// thinning a rate-b process. Keep/discard decisions and superposed points
/// use separate streams of `seed`. Throws NonPositiveIntensityError when
/// lambda <= 0 at an event.
SuperThinResult super_thin(const EventCatalog& catalog,
                           const std::function<double(double)>& intensity, double b,
                           std::uint64_t seed);

/// u_k = 1 - exp(-b (t_k - t_{k-1})), t_0 = 0.
std::vector<double> standardized_interevent(std::span<const double> times, double b);
inline std::vector<double> standardized_interevent(const SuperThinResult& r) {
  return standardized_interevent(r.times, r.b);
}

/// sum_{i<=k} u_i / sum_{i<=m} u_i for k = 1..m.
std::vector<double> normalized_cumsum(std::span<const double> u);

enum class BandMethod {
  /// Per-index quantiles at the nominal level; not simultaneous.
  pointwise,
  /// Per-index quantiles at level 1 - alpha / m.
  bonferroni,
  /// Per-index order statistics at the deepest common rank that keeps the
  /// requested fraction of simulated paths entirely inside.
  simultaneous_rank,
};

struct UniformityBand {
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.95;
  BandMethod method = BandMethod::simultaneous_rank;

  /// True when every point of `path` lies within [lower, upper].
  bool contains(std::span<const double> path) const;
};

/// Band for the normalized cumulative sums of m iid uniforms from `nsim`
/// simulated paths. Requires m >= 1 and nsim >= 100.
UniformityBand uniformity_band(std::size_t m, std::size_t nsim, double level, std::uint64_t seed,
                               BandMethod method = BandMethod::simultaneous_rank);

/// Kolmogorov-Smirnov distance of `u` from Uniform(0, 1).
double ks_statistic_uniform(std::span<const double> u);
/// Asymptotic p-value of D for sample size n, with Stephens' small-n correction.
double ks_pvalue(double D, std::size_t n);

/// sqrt(mean((a - b)^2)); throws std::invalid_argument on length mismatch.
double rmse(std::span<const double> estimate, std::span<const double> truth);

}  // namespace vph
