#include "vph/simd/kernels.hpp"

#include <cmath>
#include <limits>

namespace vph::simd::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

void exp_decay_row(std::span<const double> times, double origin, double rate, double scale,
                   std::span<double> out) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    out[k] = scale * std::exp(-rate * (times[k] - origin));
  }
}

double exp_decay_sum(std::span<const double> times, std::span<const double> weights, double t,
                     double rate) {
  double acc = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    acc += weights[k] * std::exp(-rate * (t - times[k]));
  }
  return acc;
}

double min_sq_distance(double x, std::span<const double> xs) {
  double best = std::numeric_limits<double>::infinity();
  for (double v : xs) {
    const double d = x - v;
    best = std::min(best, d * d);
  }
  return best;
}

GaussianSums gaussian_sums(double x, std::span<const double> xs, std::span<const double> ys,
                           double inv_two_h2, double offset_sq) {
  GaussianSums s{0.0, 0.0};
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double d = x - xs[k];
    const double w = std::exp(-(d * d - offset_sq) * inv_two_h2);
    s.weighted += w * ys[k];
    s.total += w;
  }
  return s;
}

}  // namespace vph::simd::scalar
