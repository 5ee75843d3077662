#include "vph/stabilize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "vph/error.hpp"
#include "vph/log.hpp"
#include "vph/simd/kernels.hpp"

namespace vph {

std::vector<double> EvaluationGrid::points() const {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  if (!(end >= start)) throw std::invalid_argument("grid end precedes start");
  const auto count = static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
  std::vector<double> pts(count);
  for (std::size_t k = 0; k < count; ++k) pts[k] = start + static_cast<double>(k) * step;
  return pts;
}

ProductivityEstimate truncate_nonneg(ProductivityEstimate est) {
  for (double& v : est.values) v = std::max(v, 0.0);
  est.flags.set(PipelineFlag::truncated);
  return est;
}

namespace {

double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Scales `values` so they sum to `target`; a second pass absorbs the
// rounding of the first.
void scale_to_sum(std::vector<double>& values, double target) {
  if (target == 0.0) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  for (int pass = 0; pass < 2; ++pass) {
    const double s = sum_of(values);
    const double factor = target / s;
    for (double& v : values) v *= factor;
  }
}

bool negative_target(double target, NegativeTargetPolicy policy, std::vector<double>& values,
                     const char* what) {
  if (target >= 0.0) return false;
  switch (policy) {
    case NegativeTargetPolicy::skip:
      warn(std::string(what) + ": background alone exceeds the observed count; rescaling skipped");
      return true;
    case NegativeTargetPolicy::zero:
      warn(std::string(what) + ": background alone exceeds the observed count; estimates set to 0");
      std::fill(values.begin(), values.end(), 0.0);
      return true;
    case NegativeTargetPolicy::apply:
      return false;
  }
  return false;
}

}  // namespace

ProductivityEstimate rescale_total(ProductivityEstimate est, std::size_t n, double mu, double T,
                                   const RescaleOptions& opts) {
  const double target = static_cast<double>(n) - mu * T;
  if (negative_target(target, opts.on_negative_target, est.values, "rescale_total")) return est;
  const double s = est.sum();
  if (!(std::abs(s) > opts.zero_sum_tolerance)) throw ZeroSumError(s);
  scale_to_sum(est.values, target);
  if (target < 0.0) est.flags.clear(PipelineFlag::truncated);
  est.flags.set(PipelineFlag::rescaled);
  return est;
}

namespace {

// Type-7 sample quantile (linear interpolation between order statistics).
double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double silverman_bandwidth(std::span<const double> values, double exponent) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("bandwidth selection needs at least two values");
  const double mean = sum_of(values) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw DegenerateSpreadError();

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;  // heavy ties collapse the IQR
  return 0.9 * spread * std::pow(static_cast<double>(n), exponent);
}

double resolve_bandwidth(const SmootherConfig& cfg, std::span<const double> locations) {
  if (cfg.bandwidth) {
    if (!(*cfg.bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    return *cfg.bandwidth;
  }
  return silverman_bandwidth(locations, cfg.silverman_exponent);
}

std::vector<double> kernel_smooth(std::span<const double> xs, std::span<const double> ys,
                                  double bandwidth, std::span<const double> eval_at) {
  if (xs.empty()) throw std::invalid_argument("kernel smoother needs at least one point");
  if (xs.size() != ys.size()) throw std::invalid_argument("smoother locations and values differ in length");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  std::vector<double> out(eval_at.size());
  for (std::size_t k = 0; k < eval_at.size(); ++k) {
    const double x = eval_at[k];
    const double offset = simd::min_sq_distance(x, xs);
    const simd::GaussianSums s = simd::gaussian_sums(x, xs, ys, inv_two_h2, offset);
    out[k] = std::clamp(s.weighted / s.total, *ymin, *ymax);
  }
  return out;
}

std::vector<double> kernel_smooth(std::span<const double> xs, std::span<const double> ys,
                                  const SmootherConfig& cfg, std::span<const double> eval_at) {
  return kernel_smooth(xs, ys, resolve_bandwidth(cfg, xs), eval_at);
}

std::vector<double> gaussian_kde(std::span<const double> xs, double bandwidth,
                                 std::span<const double> eval_at) {
  if (xs.empty()) throw std::invalid_argument("density estimate needs at least one point");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double norm = 1.0 / (static_cast<double>(xs.size()) * bandwidth * std::sqrt(2.0 * M_PI));
  std::vector<double> out(eval_at.size());
  for (std::size_t k = 0; k < eval_at.size(); ++k) {
    out[k] = norm * simd::gaussian_sums(eval_at[k], xs, xs, inv_two_h2, 0.0).total;
  }
  return out;
}

ProductivityEstimate stabilize_pipeline(ProductivityEstimate est, const EventCatalog& catalog,
                                        double mu, const PipelineConfig& cfg) {
  if (est.values.size() != catalog.size()) {
    throw std::invalid_argument("estimate length does not match catalog");
  }
  const std::span<const double> locations =
      cfg.smoother.domain == SmoothingDomain::time ? catalog.times() : catalog.marks();
  for (Stage stage : cfg.order) {
    switch (stage) {
      case Stage::truncate:
        est = truncate_nonneg(std::move(est));
        break;
      case Stage::smooth: {
        const double h = resolve_bandwidth(cfg.smoother, locations);
        est.values = kernel_smooth(locations, est.values, h, locations);
        est.bandwidth = h;
        est.flags.set(PipelineFlag::smoothed);
        break;
      }
      case Stage::rescale:
        est = rescale_total(std::move(est), catalog.size(), mu, catalog.window_end(), cfg.rescale);
        break;
    }
  }
  return est;
}

MarkCurve smooth_by_mark(const ProductivityEstimate& est, std::span<const double> marks,
                         std::size_t n, double mu, double T, const SmootherConfig& cfg,
                         const RescaleOptions& opts) {
  if (marks.size() != est.values.size()) {
    throw std::invalid_argument("marks do not align with the estimate");
  }
  if (marks.empty()) throw std::invalid_argument("mark smoothing needs at least one event");
  MarkCurve curve;
  const auto [lo, hi] = std::minmax_element(marks.begin(), marks.end());
  const EvaluationGrid grid = cfg.grid.value_or(EvaluationGrid{*lo, *hi, 0.01});
  curve.grid = grid.points();
  curve.step = grid.step;
  curve.bandwidth = resolve_bandwidth(cfg, marks);
  curve.values = kernel_smooth(marks, est.values, curve.bandwidth, curve.grid);
  curve.density = gaussian_kde(marks, curve.bandwidth, curve.grid);

  const double target = 1.0 - mu * T / static_cast<double>(n);
  if (negative_target(target, opts.on_negative_target, curve.values, "smooth_by_mark")) {
    return curve;
  }
  double weighted = 0.0;
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    weighted += curve.density[k] * curve.values[k] * curve.step;
  }
  if (!(std::abs(weighted) > opts.zero_sum_tolerance)) throw ZeroSumError(weighted);
  if (target == 0.0) {
    std::fill(curve.values.begin(), curve.values.end(), 0.0);
    curve.rescaled = true;
    return curve;
  }
  for (int pass = 0; pass < 2; ++pass) {
    const double factor = target / weighted;
    weighted = 0.0;
    for (std::size_t k = 0; k < curve.grid.size(); ++k) {
      curve.values[k] *= factor;
      weighted += curve.density[k] * curve.values[k] * curve.step;
    }
  }
  curve.rescaled = true;
  return curve;
}

}  // namespace vph
