// Built with -mavx2 -mfma. Nothing here may be called unless the dispatcher
// has confirmed CPU support.

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "vph/simd/kernels.hpp"

namespace vph::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmin(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_min_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_min_sd(m, _mm_unpackhi_pd(m, m)));
}

// Cephes-style exp: range reduction by ln 2 split in two parts, then a
// (3,3) rational approximation on [-ln2/2, ln2/2]. Inputs below the normal
// range flush to zero.
inline __m256d exp_pd(__m256d x) {
  const __m256d kHi = _mm256_set1_pd(709.0);
  const __m256d kLo = _mm256_set1_pd(-708.39);
  const __m256d kLog2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d kC1 = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d kC2 = _mm256_set1_pd(1.42860682030941723212E-6);
  const __m256d kP0 = _mm256_set1_pd(1.26177193074810590878E-4);
  const __m256d kP1 = _mm256_set1_pd(3.02994407707441961300E-2);
  const __m256d kP2 = _mm256_set1_pd(9.99999999999999999910E-1);
  const __m256d kQ0 = _mm256_set1_pd(3.00198505138664455042E-6);
  const __m256d kQ1 = _mm256_set1_pd(2.52448340349684104192E-3);
  const __m256d kQ2 = _mm256_set1_pd(2.27265548208155028766E-1);
  const __m256d kQ3 = _mm256_set1_pd(2.00000000000000000009E0);
  const __m256d kOne = _mm256_set1_pd(1.0);
  const __m256d kTwo = _mm256_set1_pd(2.0);
  const __m256d kMagic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52

  const __m256d underflow = _mm256_cmp_pd(x, kLo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, kLo), kHi);

  const __m256d n =
      _mm256_round_pd(_mm256_mul_pd(x, kLog2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, kC1, x);
  r = _mm256_fnmadd_pd(n, kC2, r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_fmadd_pd(kP0, rr, kP1);
  p = _mm256_fmadd_pd(p, rr, kP2);
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_fmadd_pd(kQ0, rr, kQ1);
  q = _mm256_fmadd_pd(q, rr, kQ2);
  q = _mm256_fmadd_pd(q, rr, kQ3);
  const __m256d e = _mm256_fmadd_pd(kTwo, _mm256_div_pd(p, _mm256_sub_pd(q, p)), kOne);

  // 2^n assembled directly in the exponent field.
  const __m256i bias = _mm256_set1_epi64x(1023);
  __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, kMagic)),
                                _mm256_castpd_si256(kMagic));
  ni = _mm256_slli_epi64(_mm256_add_epi64(ni, bias), 52);
  const __m256d result = _mm256_mul_pd(e, _mm256_castsi256_pd(ni));
  return _mm256_andnot_pd(underflow, result);
}

}  // namespace

void exp_inplace(std::span<double> values) {
  std::size_t k = 0;
  for (; k + 4 <= values.size(); k += 4) {
    _mm256_storeu_pd(values.data() + k, exp_pd(_mm256_loadu_pd(values.data() + k)));
  }
  for (; k < values.size(); ++k) values[k] = std::exp(values[k]);
}

double dot(std::span<const double> a, std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + k), _mm256_loadu_pd(pb + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + k + 4), _mm256_loadu_pd(pb + k + 4), acc1);
  }
  if (k + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + k), _mm256_loadu_pd(pb + k), acc0);
    k += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) acc += pa[k] * pb[k];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const __m256d va = _mm256_set1_pd(alpha);
  const std::size_t n = x.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vy = _mm256_loadu_pd(y.data() + k);
    _mm256_storeu_pd(y.data() + k, _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + k), vy));
  }
  for (; k < n; ++k) y[k] += alpha * x[k];
}

void exp_decay_row(std::span<const double> times, double origin, double rate, double scale,
                   std::span<double> out) {
  const __m256d vneg_rate = _mm256_set1_pd(-rate);
  const __m256d vorigin = _mm256_set1_pd(origin);
  const __m256d vscale = _mm256_set1_pd(scale);
  const std::size_t n = times.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d lag = _mm256_sub_pd(_mm256_loadu_pd(times.data() + k), vorigin);
    const __m256d e = exp_pd(_mm256_mul_pd(vneg_rate, lag));
    _mm256_storeu_pd(out.data() + k, _mm256_mul_pd(vscale, e));
  }
  for (; k < n; ++k) out[k] = scale * std::exp(-rate * (times[k] - origin));
}

double exp_decay_sum(std::span<const double> times, std::span<const double> weights, double t,
                     double rate) {
  const __m256d vrate = _mm256_set1_pd(rate);
  const __m256d vt = _mm256_set1_pd(t);
  const std::size_t n = times.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    // -rate * (t - tau) = rate * (tau - t)
    const __m256d arg = _mm256_mul_pd(vrate, _mm256_sub_pd(_mm256_loadu_pd(times.data() + k), vt));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(weights.data() + k), exp_pd(arg), acc);
  }
  double s = hsum(acc);
  for (; k < n; ++k) s += weights[k] * std::exp(-rate * (t - times[k]));
  return s;
}

double min_sq_distance(double x, std::span<const double> xs) {
  const __m256d vx = _mm256_set1_pd(x);
  __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const std::size_t n = xs.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_sub_pd(vx, _mm256_loadu_pd(xs.data() + k));
    best = _mm256_min_pd(best, _mm256_mul_pd(d, d));
  }
  double b = hmin(best);
  for (; k < n; ++k) {
    const double d = x - xs[k];
    b = std::min(b, d * d);
  }
  return b;
}

GaussianSums gaussian_sums(double x, std::span<const double> xs, std::span<const double> ys,
                           double inv_two_h2, double offset_sq) {
  const __m256d vx = _mm256_set1_pd(x);
  const __m256d vneg_scale = _mm256_set1_pd(-inv_two_h2);
  const __m256d voffset = _mm256_set1_pd(offset_sq);
  __m256d wsum = _mm256_setzero_pd();
  __m256d ysum = _mm256_setzero_pd();
  const std::size_t n = xs.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_sub_pd(vx, _mm256_loadu_pd(xs.data() + k));
    const __m256d arg = _mm256_mul_pd(vneg_scale, _mm256_sub_pd(_mm256_mul_pd(d, d), voffset));
    const __m256d w = exp_pd(arg);
    wsum = _mm256_add_pd(wsum, w);
    ysum = _mm256_fmadd_pd(w, _mm256_loadu_pd(ys.data() + k), ysum);
  }
  GaussianSums s{hsum(ysum), hsum(wsum)};
  for (; k < n; ++k) {
    const double d = x - xs[k];
    const double w = std::exp(-(d * d - offset_sq) * inv_two_h2);
    s.weighted += w * ys[k];
    s.total += w;
  }
  return s;
}

}  // namespace vph::simd::avx2
