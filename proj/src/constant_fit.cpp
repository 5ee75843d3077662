// Constant-productivity exponential Hawkes MLE with Hessian standard errors.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "vph/estimate.hpp"

namespace vph {
namespace {

// Exact log-likelihood of mu + K sum beta exp(-beta (t - tau_i)) in O(n).
double exp_hawkes_loglik(std::span<const double> t, double T, double mu, double K, double beta) {
  if (!(mu > 0.0) || !(K >= 0.0) || !(beta > 0.0)) return -std::numeric_limits<double>::infinity();
  double log_sum = 0.0;
  double decayed = 0.0;
  double tail_mass = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0) decayed = std::exp(-beta * (t[i] - t[i - 1])) * (decayed + 1.0);
    log_sum += std::log(mu + K * beta * decayed);
    tail_mass += -std::expm1(-beta * (T - t[i]));
  }
  return log_sum - mu * T - K * tail_mass;
}

struct Problem {
  std::span<const double> times;
  double T;
  std::size_t evaluations = 0;

  double loglik(const std::array<double, 3>& p) {
    ++evaluations;
    return exp_hawkes_loglik(times, T, p[0], p[1], p[2]);
  }
};

double negative_loglik_log_params(const gsl_vector* v, void* ctx) {
  auto* prob = static_cast<Problem*>(ctx);
  const std::array<double, 3> p{std::exp(gsl_vector_get(v, 0)), std::exp(gsl_vector_get(v, 1)),
                                std::exp(gsl_vector_get(v, 2))};
  const double ll = prob->loglik(p);
  return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;
using MinimizerPtr = std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter>;

struct SimplexRun {
  std::array<double, 3> log_params;
  double value;
  bool converged;
};

SimplexRun run_simplex(Problem& prob, const std::array<double, 3>& start, double step,
                       const FitOptions& opts) {
  gsl_multimin_function fn{&negative_loglik_log_params, 3, &prob};
  VectorPtr x(gsl_vector_alloc(3));
  VectorPtr steps(gsl_vector_alloc(3));
  for (std::size_t k = 0; k < 3; ++k) {
    gsl_vector_set(x.get(), k, start[k]);
    gsl_vector_set(steps.get(), k, step);
  }
  MinimizerPtr m(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3));
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), steps.get());

  bool converged = false;
  for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(m.get());
    if (gsl_multimin_test_size(size, opts.tolerance) == GSL_SUCCESS) {
      converged = true;
      break;
    }
  }
  SimplexRun run;
  for (std::size_t k = 0; k < 3; ++k) run.log_params[k] = gsl_vector_get(m->x, k);
  run.value = m->fval;
  run.converged = converged;
  return run;
}

using Matrix3 = std::array<std::array<double, 3>, 3>;

Matrix3 hessian(Problem& prob, std::array<double, 3> p, double rel_step) {
  // Steps have an absolute floor; near the K = 0 boundary the stencil centre
  // moves just inside the domain so every evaluation stays finite.
  std::array<double, 3> h{};
  for (std::size_t k = 0; k < 3; ++k) {
    h[k] = rel_step * std::max(std::abs(p[k]), 1e-2);
    p[k] = std::max(p[k], 1.5 * h[k]);
  }
  auto f = [&](std::array<double, 3> q) { return prob.loglik(q); };
  const double f0 = f(p);
  Matrix3 H{};
  for (std::size_t a = 0; a < 3; ++a) {
    auto up = p, dn = p;
    up[a] += h[a];
    dn[a] -= h[a];
    H[a][a] = (f(up) - 2.0 * f0 + f(dn)) / (h[a] * h[a]);
    for (std::size_t b = a + 1; b < 3; ++b) {
      auto pp = p, pm = p, mp = p, mm = p;
      pp[a] += h[a];
      pp[b] += h[b];
      pm[a] += h[a];
      pm[b] -= h[b];
      mp[a] -= h[a];
      mp[b] += h[b];
      mm[a] -= h[a];
      mm[b] -= h[b];
      H[a][b] = H[b][a] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[a] * h[b]);
    }
  }
  return H;
}

// Inverse by cofactors; returns false when singular.
bool invert(const Matrix3& m, Matrix3& inv) {
  const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return false;
  inv[0][0] = c00 / det;
  inv[1][0] = c01 / det;
  inv[2][0] = c02 / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return true;
}

}  // namespace

FitResult fit_constant_hawkes(const EventCatalog& catalog, const HawkesParams& init,
                              const FitOptions& opts) {
  if (catalog.size() < 2) throw std::invalid_argument("constant Hawkes fit needs n >= 2");
  if (!init.kernel.is_exponential()) {
    throw std::invalid_argument("constant Hawkes fit supports the exponential kernel only");
  }
  init.validate();

  gsl_error_handler_t* previous_handler = gsl_set_error_handler_off();
  Problem prob{catalog.times(), catalog.window_end()};

  // A zero initial K has no log; start it slightly inside the domain.
  std::array<double, 3> start{std::log(init.mu), std::log(std::max(init.K, 1e-3)),
                              std::log(init.kernel.exponential_rate())};
  SimplexRun best = run_simplex(prob, start, 0.5, opts);
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    SimplexRun next = run_simplex(prob, best.log_params, 0.1, opts);
    const bool improved = next.value < best.value - 1e-10;
    if (next.value <= best.value) best = next;
    if (!improved && next.converged) break;
  }
  gsl_set_error_handler(previous_handler);

  FitResult fit;
  fit.mu_hat = std::exp(best.log_params[0]);
  fit.K_hat = std::exp(best.log_params[1]);
  fit.beta_hat = std::exp(best.log_params[2]);
  fit.log_likelihood = -best.value;
  fit.converged = best.converged;

  const std::array<double, 3> p{fit.mu_hat, fit.K_hat, fit.beta_hat};
  const Matrix3 H = hessian(prob, p, opts.hessian_step);
  Matrix3 neg_h{};
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) neg_h[a][b] = -H[a][b];
  Matrix3 cov{};
  const bool ok = invert(neg_h, cov);
  for (std::size_t k = 0; k < 3; ++k) {
    fit.standard_errors[k] = (ok && cov[k][k] > 0.0) ? std::sqrt(cov[k][k])
                                                     : std::numeric_limits<double>::quiet_NaN();
  }
  fit.evaluations = prob.evaluations;
  return fit;
}

}  // namespace vph
