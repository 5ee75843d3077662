#include "vph/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vph/error.hpp"
#include "vph/random.hpp"

namespace vph {

SuperThinResult super_thin(const EventCatalog& catalog,
                           const std::function<double(double)>& intensity, double b,
                           std::uint64_t seed) {
  if (!(b > 0.0)) throw std::invalid_argument("super-thinning rate b must be positive");
  const double T = catalog.window_end();
  Rng keep_rng = make_rng(seed, 1);
  Rng super_rng = make_rng(seed, 2);
  std::uniform_real_distribution<double> uni01(0.0, 1.0);

  struct Point {
    double t;
    ResidualOrigin origin;
  };
  std::vector<Point> points;

  const auto times = catalog.times();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double lam = intensity(times[i]);
    if (!(lam > 0.0)) throw NonPositiveIntensityError(i, lam);
    const double u = uni01(keep_rng);
    if (u < std::min(1.0, b / lam)) points.push_back({times[i], ResidualOrigin::kept});
  }

  if (T > 0.0) {
    std::poisson_distribution<long long> count(b * T);
    const long long candidates = count(super_rng);
    for (long long c = 0; c < candidates; ++c) {
      const double t = T * uni01(super_rng);
      const double accept = uni01(super_rng);
      const double lam = intensity(t);
      if (lam < b && accept < 1.0 - lam / b) points.push_back({t, ResidualOrigin::superposed});
    }
  }

  std::sort(points.begin(), points.end(), [](const Point& a, const Point& c) { return a.t < c.t; });
  SuperThinResult out;
  out.b = b;
  out.window_end = T;
  out.times.reserve(points.size());
  out.origin.reserve(points.size());
  for (const Point& p : points) {
    out.times.push_back(p.t);
    out.origin.push_back(p.origin);
  }
  out.standardized_u = standardized_interevent(out.times, b);
  return out;
}

std::vector<double> standardized_interevent(std::span<const double> times, double b) {
  std::vector<double> u(times.size());
  double previous = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double gap = std::max(times[k] - previous, 0.0);
    u[k] = -std::expm1(-b * gap);
    previous = times[k];
  }
  return u;
}

std::vector<double> normalized_cumsum(std::span<const double> u) {
  std::vector<double> out(u.size());
  std::partial_sum(u.begin(), u.end(), out.begin());
  if (!out.empty() && out.back() > 0.0) {
    const double total = out.back();
    for (double& v : out) v /= total;
    out.back() = 1.0;
  }
  return out;
}

bool UniformityBand::contains(std::span<const double> path) const {
  if (path.size() != lower.size()) throw std::invalid_argument("path length differs from band");
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path[k] < lower[k] || path[k] > upper[k]) return false;
  }
  return true;
}

UniformityBand uniformity_band(std::size_t m, std::size_t nsim, double level, std::uint64_t seed,
                               BandMethod method) {
  if (m < 1) throw std::invalid_argument("uniformity band needs m >= 1");
  if (nsim < 100) throw std::invalid_argument("uniformity band needs nsim >= 100");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("band level must be in (0, 1)");

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> uni01(0.0, 1.0);
  // paths[s * m + k]
  std::vector<double> paths(nsim * m);
  std::vector<double> u(m);
  for (std::size_t s = 0; s < nsim; ++s) {
    for (double& v : u) v = uni01(rng);
    const auto cs = normalized_cumsum(u);
    std::copy(cs.begin(), cs.end(), paths.begin() + static_cast<std::ptrdiff_t>(s * m));
  }

  // Column-wise order statistics.
  std::vector<std::vector<double>> sorted(m, std::vector<double>(nsim));
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t s = 0; s < nsim; ++s) sorted[k][s] = paths[s * m + k];
    std::sort(sorted[k].begin(), sorted[k].end());
  }

  UniformityBand band;
  band.level = level;
  band.method = method;
  band.lower.resize(m);
  band.upper.resize(m);

  auto fill_quantile = [&](double tail) {
    for (std::size_t k = 0; k < m; ++k) {
      const auto& col = sorted[k];
      const double pos_lo = tail * static_cast<double>(nsim - 1);
      const double pos_hi = (1.0 - tail) * static_cast<double>(nsim - 1);
      band.lower[k] = col[static_cast<std::size_t>(std::floor(pos_lo))];
      band.upper[k] = col[static_cast<std::size_t>(std::ceil(pos_hi))];
    }
  };

  switch (method) {
    case BandMethod::pointwise:
      fill_quantile((1.0 - level) / 2.0);
      break;
    case BandMethod::bonferroni:
      fill_quantile((1.0 - level) / (2.0 * static_cast<double>(m)));
      break;
    case BandMethod::simultaneous_rank: {
      // depth(s) = min over k of the distance of path s from either end of
      // the order statistics at k (1 = most extreme).
      std::vector<std::size_t> depth(nsim, nsim);
      for (std::size_t k = 0; k < m; ++k) {
        const auto& col = sorted[k];
        for (std::size_t s = 0; s < nsim; ++s) {
          const double v = paths[s * m + k];
          const auto lo_rank =
              static_cast<std::size_t>(std::lower_bound(col.begin(), col.end(), v) - col.begin()) + 1;
          const auto hi_rank = static_cast<std::size_t>(
              col.end() - std::upper_bound(col.begin(), col.end(), v)) + 1;
          depth[s] = std::min({depth[s], lo_rank, hi_rank});
        }
      }
      // Largest d with at least `level` of the paths at depth >= d.
      std::vector<std::size_t> sorted_depth(depth);
      std::sort(sorted_depth.begin(), sorted_depth.end(), std::greater<>());
      const auto need = static_cast<std::size_t>(std::ceil(level * static_cast<double>(nsim)));
      const std::size_t d = sorted_depth[std::min(need, nsim) - 1];
      for (std::size_t k = 0; k < m; ++k) {
        band.lower[k] = sorted[k][d - 1];
        band.upper[k] = sorted[k][nsim - d];
      }
      break;
    }
  }
  return band;
}

double ks_statistic_uniform(std::span<const double> u) {
  if (u.empty()) return 0.0;
  std::vector<double> s(u.begin(), u.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = std::clamp(s[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double D, std::size_t n) {
  if (n == 0) return 1.0;
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * D;
  if (lambda <= 0.0) return 1.0;
  double p = 0.0;
  if (lambda < 1.18) {
    // Jacobi-theta form of the Kolmogorov CDF converges fast for small lambda.
    const double c = -M_PI * M_PI / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int j = 1; j <= 9; j += 2) s += std::exp(c * j * j);
    p = 1.0 - std::sqrt(2.0 * M_PI) / lambda * s;
  } else {
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double term = std::exp(-2.0 * j * j * lambda * lambda);
      s += (j % 2 == 1 ? term : -term);
      if (term < 1e-17) break;
    }
    p = 2.0 * s;
  }
  return std::clamp(p, 0.0, 1.0);
}

double rmse(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("rmse length mismatch");
  if (estimate.empty()) return 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double d = estimate[i] - truth[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(estimate.size()));
}

}  // namespace vph
