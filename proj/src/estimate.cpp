#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vph/error.hpp"
#include "vph/estimate.hpp"

namespace vph {

MleSolution solve_mle_productivities(const EventCatalog& catalog, double mu,
                                     const TriggeringKernel& kernel, const SolveOptions& opts) {
  if (catalog.size() < 2) throw std::invalid_argument("MLE needs at least two events");
  if (!(mu > 0.0)) throw std::invalid_argument("background rate mu must be positive");

  const TriggeringMatrix G = TriggeringMatrix::build(catalog, kernel);
  InverseIntensitySolution inv = solve_inverse_intensities(G, opts);

  MleSolution out;
  out.intensity.resize(inv.inverse_intensity.size());
  std::transform(inv.inverse_intensity.begin(), inv.inverse_intensity.end(),
                 out.intensity.begin(), [](double x) { return 1.0 / x; });
  out.estimate.values = solve_productivities(G, out.intensity, mu, opts);
  out.estimate.values.push_back(0.0);
  out.estimate.flags = PipelineFlag::raw;
  out.condition_estimate = inv.condition_estimate;
  out.ill_conditioned = inv.ill_conditioned;
  return out;
}

std::vector<double> score_residual(const EventCatalog& catalog, double mu,
                                   const TriggeringKernel& kernel, std::span<const double> K) {
  const std::size_t n = catalog.size();
  if (K.size() != n) throw std::invalid_argument("productivity vector misaligned with catalog");
  if (n < 2) return {};
  const auto t = catalog.times();

  std::vector<double> lambda(n, mu);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) lambda[j] += K[i] * kernel.density(t[j] - t[i]);
    if (!(lambda[j] > 0.0)) throw NonPositiveIntensityError(j, lambda[j]);
  }
  std::vector<double> residual(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double s = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) s += kernel.density(t[j] - t[i]) / lambda[j];
    residual[i] = s - 1.0;
  }
  return residual;
}

ProductivityEstimate empirical_productivities(const EventCatalog& catalog, double delta,
                                              double mu) {
  if (!(delta > 0.0)) throw std::invalid_argument("empirical window delta must be positive");
  const auto t = catalog.times();
  ProductivityEstimate est;
  est.values.resize(t.size());
  est.flags = PipelineFlag::raw;
  // Two pointers: `hi` is the first index at or beyond tau_i + delta.
  std::size_t hi = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    hi = std::max(hi, i + 1);
    while (hi < t.size() && t[hi] < t[i] + delta) ++hi;
    const double count = static_cast<double>(hi - (i + 1));
    est.values[i] = count - delta * mu;
  }
  return est;
}

LogLikelihood log_likelihood(const EventCatalog& catalog, double mu, const TriggeringKernel& kernel,
                             std::span<const double> K, Compensator mode) {
  const std::vector<double> lambda = intensities_at_events(catalog, mu, kernel, K);
  double log_sum = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0.0)) {
      return {-std::numeric_limits<double>::infinity(), i};
    }
    log_sum += std::log(lambda[i]);
  }
  const double T = catalog.window_end();
  double compensator = mu * T;
  const auto t = catalog.times();
  for (std::size_t i = 0; i < t.size(); ++i) {
    compensator += K[i] * (mode == Compensator::exact ? kernel.integral(T - t[i]) : 1.0);
  }
  return {log_sum - compensator, std::nullopt};
}

LogLikelihood log_likelihood(const EventCatalog& catalog, double mu, const TriggeringKernel& kernel,
                             double K, Compensator mode) {
  const std::vector<double> k(catalog.size(), K);
  return log_likelihood(catalog, mu, kernel, k, mode);
}

}  // namespace vph
