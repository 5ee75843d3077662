#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vph/core.hpp"

namespace vph {

/// The (n-1) x (n-1) upper-triangular matrix G[i, j] = g(tau_{j+1} - tau_i),
/// i <= j, stored row-packed: row i holds columns i..dim-1 contiguously.
class TriggeringMatrix {
 public:
  /// Requires n >= 2 and strictly increasing times (NonIncreasingTimesError).
  static TriggeringMatrix build(const EventCatalog& catalog, const TriggeringKernel& kernel);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const;
  double diagonal(std::size_t i) const { return packed_[row_offset(i)]; }
  /// Entries G[i, i..dim-1].
  std::span<const double> row(std::size_t i) const {
    return {packed_.data() + row_offset(i), dim_ - i};
  }

  /// Adds `eps` to every diagonal entry (Tikhonov-style conditioning hook).
  void add_ridge(double eps);

  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> multiply_transposed(std::span<const double> x) const;
  /// Infinity norm (max absolute row sum).
  double norm_inf() const;

 private:
  TriggeringMatrix(std::size_t dim, std::vector<double> packed)
      : dim_(dim), packed_(std::move(packed)) {}
  std::size_t row_offset(std::size_t i) const noexcept {
    return i * (2 * dim_ - i + 1) / 2;
  }

  std::size_t dim_;
  std::vector<double> packed_;
};

struct SolveOptions {
  /// Diagonal entries at or below this raise SingularMatrixError.
  double pivot_tolerance = 1e-12;
  /// Added to the diagonal before solving; 0 disables.
  double ridge = 0.0;
  /// Condition estimates above this set `ill_conditioned`.
  double condition_warning = 1e12;
};

struct InverseIntensitySolution {
  /// 1 / lambda(tau_2) .. 1 / lambda(tau_n).
  std::vector<double> inverse_intensity;
  /// Lower bound ||G||_inf * ||G^-1 1||_inf on the infinity-norm condition number.
  double condition_estimate = 0.0;
  bool ill_conditioned = false;
};

/// Back substitution for G x = 1. Never forms G^-1.
InverseIntensitySolution solve_inverse_intensities(const TriggeringMatrix& G,
                                                   const SolveOptions& opts = {});

/// Forward substitution for G^T K = lambda - mu given lambda(tau_2..tau_n).
/// Returns K(tau_1..tau_{n-1}).
std::vector<double> solve_productivities(const TriggeringMatrix& G,
                                         std::span<const double> intensity, double mu,
                                         const SolveOptions& opts = {});

struct MleSolution {
  ProductivityEstimate estimate;
  /// Fitted lambda(tau_2) .. lambda(tau_n); may contain nonpositive values.
  std::vector<double> intensity;
  double condition_estimate = 0.0;
  bool ill_conditioned = false;
};

/// Closed-form per-event productivity MLE: K = (G^T)^-1 [1 / (G^-1 1) - mu],
/// K(tau_n) = 0. Raw values may be negative.
MleSolution solve_mle_productivities(const EventCatalog& catalog, double mu,
                                     const TriggeringKernel& kernel,
                                     const SolveOptions& opts = {});

inline ProductivityEstimate mle_productivities(const EventCatalog& catalog, double mu,
                                               const TriggeringKernel& kernel,
                                               const SolveOptions& opts = {}) {
  return solve_mle_productivities(catalog, mu, kernel, opts).estimate;
}

/// Score residuals sum_{j>i} g(tau_j - tau_i) / lambda(tau_j) - 1 for
/// i = 1..n-1, with lambda rebuilt from K. Computed by direct summation.
/// Throws NonPositiveIntensityError when some lambda(tau_j) <= 0.
std::vector<double> score_residual(const EventCatalog& catalog, double mu,
                                   const TriggeringKernel& kernel, std::span<const double> K);

/// K_i = #{j : tau_i < tau_j < tau_i + delta} - delta * mu, no edge correction.
ProductivityEstimate empirical_productivities(const EventCatalog& catalog, double delta,
                                              double mu);

enum class Compensator {
  /// mu T + sum_i K_i G(T - tau_i).
  exact,
  /// mu T + sum_i K_i: each event's full unit offspring mass, the form whose
  /// stationary point is the closed-form estimator.
  asymptotic,
};

struct LogLikelihood {
  double value;
  /// First event with lambda <= 0 when value is -infinity.
  std::optional<std::size_t> nonpositive_index;
};

/// sum_i log lambda(tau_i) - integral of lambda over [0, T].
LogLikelihood log_likelihood(const EventCatalog& catalog, double mu, const TriggeringKernel& kernel,
                             std::span<const double> K, Compensator mode = Compensator::exact);

/// Constant-productivity overload.
LogLikelihood log_likelihood(const EventCatalog& catalog, double mu, const TriggeringKernel& kernel,
                             double K, Compensator mode = Compensator::exact);

struct FitOptions {
  std::size_t max_iterations = 4000;
  std::size_t restarts = 3;
  /// Simplex size tolerance in log-parameter space.
  double tolerance = 1e-7;
  /// Relative step for the finite-difference Hessian.
  double hessian_step = 1e-4;
};

/// Constant-productivity exponential Hawkes fit.
struct FitResult {
  double mu_hat = 0.0;
  double K_hat = 0.0;
  double beta_hat = 0.0;
  /// Standard errors of (mu, K, beta) from the inverse observed information;
  /// NaN when the Hessian is not negative definite.
  std::array<double, 3> standard_errors{};
  double log_likelihood = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;

  HawkesParams params() const { return {mu_hat, K_hat, TriggeringKernel::exponential(beta_hat)}; }
};

/// Maximizes the exact-compensator log-likelihood over (mu, K, beta) with a
/// Nelder-Mead simplex on log parameters, restarted from the best vertex.
/// Requires n >= 2 and an exponential kernel in `init`.
FitResult fit_constant_hawkes(const EventCatalog& catalog, const HawkesParams& init,
                              const FitOptions& opts = {});

}  // namespace vph
