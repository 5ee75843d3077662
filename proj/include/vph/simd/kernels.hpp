#pragma once

// Data-parallel inner loops shared by the estimators and smoothers.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant built in its own translation unit. The active variant is chosen
// once at startup from CPUID and can be overridden with the VPH_SIMD
// environment variable ("scalar" or "avx2") or set_active_isa().
// Vector results agree with the scalar reference to a few ulp per element;
// reductions differ only by summation order.

#include <span>
#include <string_view>

namespace vph::simd {

enum class Isa { scalar, avx2 };

struct GaussianSums {
  double weighted;  // sum of w_i * y_i
  double total;     // sum of w_i
};

struct KernelTable {
  double (*dot)(std::span<const double> a, std::span<const double> b);
  void (*axpy)(double alpha, std::span<const double> x, std::span<double> y);
  void (*exp_decay_row)(std::span<const double> times, double origin, double rate, double scale,
                        std::span<double> out);
  double (*exp_decay_sum)(std::span<const double> times, std::span<const double> weights,
                          double t, double rate);
  double (*min_sq_distance)(double x, std::span<const double> xs);
  GaussianSums (*gaussian_sums)(double x, std::span<const double> xs,
                                std::span<const double> ys, double inv_two_h2, double offset_sq);
};

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void exp_decay_row(std::span<const double> times, double origin, double rate, double scale,
                   std::span<double> out);
double exp_decay_sum(std::span<const double> times, std::span<const double> weights, double t,
                     double rate);
double min_sq_distance(double x, std::span<const double> xs);
GaussianSums gaussian_sums(double x, std::span<const double> xs, std::span<const double> ys,
                           double inv_two_h2, double offset_sq);
}  // namespace scalar

#if defined(VPH_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void exp_decay_row(std::span<const double> times, double origin, double rate, double scale,
                   std::span<double> out);
double exp_decay_sum(std::span<const double> times, std::span<const double> weights, double t,
                     double rate);
double min_sq_distance(double x, std::span<const double> xs);
GaussianSums gaussian_sums(double x, std::span<const double> xs, std::span<const double> ys,
                           double inv_two_h2, double offset_sq);
/// exp(x) for each element; exposed for accuracy tests.
void exp_inplace(std::span<double> values);
}  // namespace avx2
#endif

bool isa_supported(Isa isa) noexcept;
Isa active_isa() noexcept;
/// Throws std::invalid_argument if the CPU or build lacks `isa`.
void set_active_isa(Isa isa);
const KernelTable& table(Isa isa);
std::string_view isa_name(Isa isa) noexcept;

namespace detail {
const KernelTable& active_table() noexcept;
}

/// sum_k a[k] * b[k]; spans must have equal length.
inline double dot(std::span<const double> a, std::span<const double> b) {
  return detail::active_table().dot(a, b);
}
/// y += alpha * x.
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  detail::active_table().axpy(alpha, x, y);
}
/// out[k] = scale * exp(-rate * (times[k] - origin)).
inline void exp_decay_row(std::span<const double> times, double origin, double rate,
                          double scale, std::span<double> out) {
  detail::active_table().exp_decay_row(times, origin, rate, scale, out);
}
/// sum_k weights[k] * exp(-rate * (t - times[k])).
inline double exp_decay_sum(std::span<const double> times, std::span<const double> weights,
                            double t, double rate) {
  return detail::active_table().exp_decay_sum(times, weights, t, rate);
}
/// min_k (x - xs[k])^2.
inline double min_sq_distance(double x, std::span<const double> xs) {
  return detail::active_table().min_sq_distance(x, xs);
}
/// Gaussian weights w_k = exp(-((x - xs[k])^2 - offset_sq) * inv_two_h2).
inline GaussianSums gaussian_sums(double x, std::span<const double> xs,
                                  std::span<const double> ys, double inv_two_h2,
                                  double offset_sq) {
  return detail::active_table().gaussian_sums(x, xs, ys, inv_two_h2, offset_sq);
}

}  // namespace vph::simd
