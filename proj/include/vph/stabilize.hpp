#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vph/core.hpp"

namespace vph {

enum class SmoothingDomain { time, mark };

struct EvaluationGrid {
  double start;
  double end;
  double step;

  /// start, start + step, ... up to end (inclusive within rounding).
  std::vector<double> points() const;
};

/// Gaussian Nadaraya-Watson smoother settings. An empty bandwidth selects
/// Silverman's rule of thumb on the smoothing locations.
struct SmootherConfig {
  std::optional<double> bandwidth;
  SmoothingDomain domain = SmoothingDomain::time;
  std::optional<EvaluationGrid> grid;
  /// Exponent of n in the rule of thumb; -0.2 is Silverman's.
  double silverman_exponent = -0.2;
};

/// What rescale_total does when n - mu T < 0, i.e. the background rate
/// alone accounts for more than the observed count.
enum class NegativeTargetPolicy {
  /// Leave the estimate unchanged and warn.
  skip,
  /// Set every value to zero and warn.
  zero,
  /// Apply the (negative) factor as is. The result is no longer
  /// nonnegative, so the `truncated` flag is cleared.
  apply,
};

struct RescaleOptions {
  NegativeTargetPolicy on_negative_target = NegativeTargetPolicy::skip;
  /// Sums at or below this raise ZeroSumError.
  double zero_sum_tolerance = 1e-12;
};

/// max(K_i, 0) componentwise.
ProductivityEstimate truncate_nonneg(ProductivityEstimate est);

/// Multiplies every value by (n - mu T) / sum K_i so the total equals the
/// expected number of triggered events.
ProductivityEstimate rescale_total(ProductivityEstimate est, std::size_t n, double mu, double T,
                                   const RescaleOptions& opts = {});

/// 0.9 min(sd, iqr / 1.34) n^exponent. Throws DegenerateSpreadError when
/// sd = 0 and std::invalid_argument for fewer than two values.
double silverman_bandwidth(std::span<const double> values, double exponent = -0.2);

/// Explicit bandwidth if set, else the rule of thumb on `locations`.
double resolve_bandwidth(const SmootherConfig& cfg, std::span<const double> locations);

/// Nadaraya-Watson estimate at each point of `eval_at` with Gaussian weights
/// exp(-(x - x_i)^2 / (2 h^2)). Weights are shifted by the nearest-point
/// distance, so the h -> 0 limit is nearest-neighbour interpolation.
std::vector<double> kernel_smooth(std::span<const double> xs, std::span<const double> ys,
                                  double bandwidth, std::span<const double> eval_at);

std::vector<double> kernel_smooth(std::span<const double> xs, std::span<const double> ys,
                                  const SmootherConfig& cfg, std::span<const double> eval_at);

/// Gaussian kernel density estimate of `xs` at `eval_at`.
std::vector<double> gaussian_kde(std::span<const double> xs, double bandwidth,
                                 std::span<const double> eval_at);

enum class Stage { truncate, smooth, rescale };

struct PipelineConfig {
  SmootherConfig smoother;
  std::vector<Stage> order{Stage::truncate, Stage::smooth, Stage::rescale};
  RescaleOptions rescale;
};

/// Applies the stages in `cfg.order`; smoothing is evaluated at the events
/// (their times, or their marks in the mark domain).
ProductivityEstimate stabilize_pipeline(ProductivityEstimate est, const EventCatalog& catalog,
                                        double mu, const PipelineConfig& cfg = {});

struct MarkCurve {
  std::vector<double> grid;
  std::vector<double> values;
  /// Estimated mark density on the grid.
  std::vector<double> density;
  double bandwidth = 0.0;
  double step = 0.0;
  bool rescaled = false;
};

/// Smooths K_i against m_i onto a grid and rescales so that
/// sum_j f(m_j) K(m_j) dm = 1 - mu T / n, f being the Gaussian KDE of the
/// marks with the same bandwidth. Without an explicit grid the curve covers
/// [min mark, max mark] in steps of 0.01.
MarkCurve smooth_by_mark(const ProductivityEstimate& est, std::span<const double> marks,
                         std::size_t n, double mu, double T, const SmootherConfig& cfg,
                         const RescaleOptions& opts = {});

}  // namespace vph
