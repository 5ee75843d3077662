#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vph/error.hpp"
#include "vph/estimate.hpp"
#include "vph/simd/kernels.hpp"

namespace vph {

TriggeringMatrix TriggeringMatrix::build(const EventCatalog& catalog,
                                         const TriggeringKernel& kernel) {
  const auto times = catalog.times();
  if (times.size() < 2) throw std::invalid_argument("triggering matrix needs at least two events");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw NonIncreasingTimesError(i);
  }
  const std::size_t dim = times.size() - 1;
  std::vector<double> packed(dim * (dim + 1) / 2);
  TriggeringMatrix G(dim, {});
  std::size_t offset = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    const auto later = times.subspan(i + 1);
    std::span<double> out(packed.data() + offset, dim - i);
    if (kernel.is_exponential()) {
      const double beta = kernel.exponential_rate();
      simd::exp_decay_row(later, times[i], beta, beta, out);
    } else {
      for (std::size_t k = 0; k < later.size(); ++k) out[k] = kernel.density(later[k] - times[i]);
    }
    offset += dim - i;
  }
  G.packed_ = std::move(packed);
  return G;
}

double TriggeringMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i >= dim_ || j >= dim_) throw std::out_of_range("triggering matrix index");
  if (i > j) return 0.0;
  return packed_[row_offset(i) + (j - i)];
}

void TriggeringMatrix::add_ridge(double eps) {
  for (std::size_t i = 0; i < dim_; ++i) packed_[row_offset(i)] += eps;
}

std::vector<double> TriggeringMatrix::multiply(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("dimension mismatch in G x");
  std::vector<double> y(dim_);
  for (std::size_t i = 0; i < dim_; ++i) y[i] = simd::dot(row(i), x.subspan(i));
  return y;
}

std::vector<double> TriggeringMatrix::multiply_transposed(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("dimension mismatch in G^T x");
  std::vector<double> y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    simd::axpy(x[i], row(i), std::span<double>(y).subspan(i));
  }
  return y;
}

double TriggeringMatrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (double v : row(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

namespace {

void check_pivots(const TriggeringMatrix& G, const SolveOptions& opts) {
  for (std::size_t i = 0; i < G.dim(); ++i) {
    const double pivot = G.diagonal(i) + opts.ridge;
    if (!(pivot > opts.pivot_tolerance)) throw SingularMatrixError(i, pivot);
  }
}

}  // namespace

InverseIntensitySolution solve_inverse_intensities(const TriggeringMatrix& G,
                                                   const SolveOptions& opts) {
  check_pivots(G, opts);
  const std::size_t d = G.dim();
  std::vector<double> x(d);
  for (std::size_t step = 0; step < d; ++step) {
    const std::size_t i = d - 1 - step;
    const auto row = G.row(i);
    const double off = simd::dot(row.subspan(1), std::span<const double>(x).subspan(i + 1));
    x[i] = (1.0 - off) / (row[0] + opts.ridge);
  }
  InverseIntensitySolution sol;
  double x_norm = 0.0;
  for (double v : x) x_norm = std::max(x_norm, std::abs(v));
  sol.condition_estimate = (G.norm_inf() + std::abs(opts.ridge)) * x_norm;
  sol.ill_conditioned = !(sol.condition_estimate <= opts.condition_warning);
  sol.inverse_intensity = std::move(x);
  return sol;
}

std::vector<double> solve_productivities(const TriggeringMatrix& G,
                                         std::span<const double> intensity, double mu,
                                         const SolveOptions& opts) {
  const std::size_t d = G.dim();
  if (intensity.size() != d) {
    throw std::invalid_argument("intensity vector must have length n - 1");
  }
  check_pivots(G, opts);
  std::vector<double> rhs(d);
  for (std::size_t j = 0; j < d; ++j) rhs[j] = intensity[j] - mu;
  std::vector<double> K(d);
  // Column-oriented: once K_i is known, remove its contribution from every
  // later equation using row i of G (column i of G^T).
  for (std::size_t i = 0; i < d; ++i) {
    const auto row = G.row(i);
    K[i] = rhs[i] / (row[0] + opts.ridge);
    simd::axpy(-K[i], row.subspan(1), std::span<double>(rhs).subspan(i + 1));
  }
  return K;
}

}  // namespace vph
